#pragma once

// Critical Bloch eigenvalue branch lambda(xi) through lambda(0) = 0, its
// expansion coefficients lambda_1, lambda_2, the derived drift and diffusion
// (a, b), and the zero-mode eigenfunctions q(.,0), qtilde(.,0) used in the
// heat-kernel leading term.

#include <vector>

#include "floq/bloch.hpp"
#include "floq/profile.hpp"

namespace floq {

struct SpectralBranch {
  std::vector<double> xi_grid;
  std::vector<Complex> lambda_values;
  Complex lambda1{0.0, 0.0};
  Complex lambda2{0.0, 0.0};
  double drift = 0.0;      // a = Re(i * lambda1)
  double diffusion = 0.0;  // b = -Re(lambda2)
  double fit_residual = 0.0;
  bool surrogate_zero_mode = false;  // manufactured p used in place of ubar'
  int n = 1;
  int K = 0;

  // Right/left zero-mode eigenfunctions at xi = 0, per component.
  std::vector<TrigInterp> q0;
  std::vector<TrigInterp> qtilde0;
  // Per-xi eigenfunction Fourier coefficients, phase-fixed against xi = 0.
  std::vector<CVec> q_coeffs;
  std::vector<CVec> qtilde_coeffs;

  double q0_at(double x, int comp = 0) const { return q0[comp](x); }
  double qtilde0_at(double x, int comp = 0) const { return qtilde0[comp](x); }
};

// Track the branch over |xi| <= xi_max on n_xi points (made odd/symmetric),
// by nearest-eigenvalue continuation from lambda(0) = 0 with step halving;
// fits lambda_1, lambda_2 on the window |xi| <= min(xi_max, 0.1 pi) with at
// least 21 points. Throws on branch collision (candidate gap < 1e-6 at the
// finest step) and if (D1) fails at xi = 0.
SpectralBranch critical_branch(const WaveProfile& profile, int K,
                               double xi_max, int n_xi);

}  // namespace floq
