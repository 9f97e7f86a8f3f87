#pragma once

// Modulation (phase-tracking) machinery: the coupled integral system for the
// modulated perturbation v and the phase derivatives (psi_t, psi_x, psi_xx),
//   v(t)    = int Gt(t) v0 + int_0^t int Gt(t-s) N(s),
//   psi(t)  = -int e(t) v0 - int_0^t int e(t-s) N(s),
// iterated as a fixed point (plain Picard), with
//   N = Q + R_x - (dxx + dt) S + T,  Q = beta(x) v^2,  S = v psi_x,
//   R = v psi_t - v psi_xx + (q0 + v_x) psi_x^2/(1+psi_x),
//   T = (df(ubar) v + beta(x) v^2) psi_x,
// on a truncated line with periodic wrap. Scalar profiles only.

#include <functional>
#include <vector>

#include "floq/green.hpp"
#include "floq/heat_sim.hpp"

namespace floq {

struct ModulationOptions {
  double T_final = 40.0;
  double ds = 0.5;          // Duhamel time grid spacing
  int m_per_unit = 16;      // spatial points per period
  int half_width = 0;       // 0: automatic
  int K = 16;
  int n_xi = 64;
  double conv_tol = 1e-6;   // sup-norm change between Picard iterates
  int max_iter = 20;
  bool nonlinear = true;    // false: N == 0 (linear split diagnostics)
  // quadratic nonlinearity u -> beta(x) u^2 (1-periodic coefficient)
  std::function<double(double)> beta = [](double) { return 1.0; };
};

struct ModulationResult {
  std::vector<double> times;  // t_k = k ds
  std::vector<RVec> v, psi, psi_t, psi_x, psi_xx, N;
  RVec grid;
  double h = 0.0;

  int iterations = 0;
  bool converged = false;
  bool diverging = false;
  std::vector<double> iteration_changes;

  double q_smallness_c = 0.0;       // fitted |Q|_L1 <= c |v|_{H1}^2
  double split_identity_error = 0.0;   // |G - (E + Gt)| on stored rows
  double linear_identity_error = 0.0;  // |(v - q0 psi) - int G v0| (N == 0)
  double Ubar0 = 0.0;
  double Ubar_star = 0.0;
  std::vector<double> dev_sup;  // sup_x |u_rec - Ubar* q0 kbar| per time
};

ModulationResult modulation_pipeline(const WaveProfile& profile,
                                     const SpectralBranch& branch,
                                     const InitialData& v0,
                                     const ModulationOptions& opts = {});

// Direct Strang simulation of u_t = L u + beta(x) u^2 on the same truncated
// line; used for reconstruction cross-checks against v - q0 psi.
std::vector<RVec> simulate_perturbation(const WaveProfile& profile,
                                        const std::function<double(double)>& u0,
                                        const std::vector<double>& times,
                                        double dt, int m_per_unit,
                                        int half_width,
                                        const std::function<double(double)>& beta);

}  // namespace floq
