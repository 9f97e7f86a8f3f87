#pragma once

// Spectral simulator for the model problem u_t = u_xx + u^q (q >= 4) on a
// truncated whole line with periodic wrap, Strang splitting of the exact
// heat multiplier with the exact reaction flow, plus decay-rate reporting
// against the heat-kernel asymptotics.

#include <functional>
#include <map>
#include <vector>

#include "floq/fit.hpp"
#include "floq/fourier.hpp"

namespace floq {

enum class DataClass {
  WeightedL1H1 = 1,      // |u0|_{L1 cap H1}, |x u0|_{L1} <= E0
  GaussianEnvelope = 2,  // |u0| <= E0 e^{-x^2/M}
  AlgebraicEnvelope = 3  // |u0| <= E0 (1+|x|)^{-r}, r > 2
};

struct InitialData {
  DataClass cls = DataClass::WeightedL1H1;
  double E0 = 0.01;
  double M = 4.0;  // gaussian envelope width
  double r = 3.0;  // algebraic envelope rate
  double sample(double x) const;
};

struct HeatSimOptions {
  double dt = 0.02;
  int points_per_unit = 16;
  int half_width = 0;          // 0: automatic with boundary-tail enforcement
  double blowup_guard = 10.0;  // sup-norm guard
  bool reaction_on = true;     // false: pure heat flow (linear check)
};

struct HeatSimResult {
  std::vector<double> times;  // recorded times
  std::vector<double> l1, l2, linf;
  std::vector<double> U;      // U(s) = int u^q dx at recorded times
  double U0 = 0.0;            // int u0 dx
  double int_U = 0.0;         // int_0^T U(s) ds (per-step trapezoid)
  std::vector<double> snapshot_times;
  std::vector<RVec> snapshots;
  double h = 0.0;
  int half_width = 0;
  int grid_size = 0;
  double grid_point(int i) const { return -half_width + i * h; }
};

// One Strang step of u_t = u_xx + u^q: exact half heat multiplier, exact
// reaction flow, exact half heat. `heat_half` holds e^{-omega^2 dt/2}.
void step_heat_q(RVec& u, const CVec& heat_half, double dt, int q,
                 double blowup_guard, bool reaction_on = true);

HeatSimResult simulate_heat_q(const InitialData& u0, int q, double T_final,
                              const std::vector<double>& snapshot_times,
                              const HeatSimOptions& opts = {});

struct EnvelopeDecadeFit {
  double t_lo = 0.0, t_hi = 0.0;
  double constant = 0.0;  // max over samples of |u - U* k| / envelope
};

struct DecayReport {
  int q = 4;
  double E0 = 0.0;
  double U_star = 0.0;          // U0 + int_0^T U + analytic tail
  double U_star_tail = 0.0;     // tail contribution (reported separately)
  double U0 = 0.0;
  SlopeFit U_slope;              // |U(s)| log-log slope on [5, T]
  std::vector<double> times;
  std::map<int, std::vector<double>> norms;       // p -> |u|_Lp (0 = inf)
  std::map<int, std::vector<double>> deviations;  // p -> |u - U* k|_Lp
  std::map<int, SlopeFit> norm_slopes;
  std::map<int, SlopeFit> dev_slopes;
  // class 2: pointwise ratio |u-U*k| (1+t) e^{x^2/(M''(1+t))}/(1+ln(1+t))
  std::vector<double> pointwise_ratios;
  SlopeFit pointwise_trend;  // log ratio against log(1+t)
  // class 3: envelope constants per time decade
  std::vector<EnvelopeDecadeFit> envelope_decades;
};

// Full report per Theorem-style diagnostics; p_list entries use 0 for inf.
DecayReport decay_report_heat(const InitialData& u0, int q, double T_final,
                              const std::vector<int>& p_list,
                              const HeatSimOptions& opts = {});

// Heat kernel k(x,t) = (4 pi t)^{-1/2} e^{-x^2/(4t)}.
double heat_kernel(double x, double t);

}  // namespace floq
