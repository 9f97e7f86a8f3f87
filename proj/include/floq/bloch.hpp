#pragma once

// Fourier-Galerkin discretization of the Bloch operators
//   L_xi = (d/dx + i xi)^2 + a (d/dx + i xi) + df(ubar(x))
// on 1-periodic functions, and spectra thereof.

#include <vector>

#include <Eigen/Dense>

#include "floq/profile.hpp"

namespace floq {

using CMat = Eigen::MatrixXcd;

// Dense Galerkin matrix in the basis e^{2 pi i k x}, k = -K..K; block row
// ordering (k + K) * n + component. Throws if the coefficient's Fourier tail
// beyond K exceeds 1e-10 (K too small for the profile).
CMat bloch_matrix(const WaveProfile& profile, double xi, int K);

struct BlochEigs {
  CVec values;   // sorted by descending real part
  CMat vectors;  // columns matching values (Fourier coefficients)
};

// Full eigendecomposition of the Galerkin matrix.
BlochEigs bloch_spectrum(const WaveProfile& profile, double xi, int K);

// Synthesize the eigenfunction with Fourier coefficient column `coeffs`
// (layout as in bloch_matrix) at position x; returns an n-vector.
CVec bloch_eigenfunction_at(const CVec& coeffs, int n, int K, double x);

struct StabilityReport {
  bool d1 = false;
  double zero_eig_abs = 0.0;  // |smallest eigenvalue of L_0|
  double gap = 0.0;           // distance from 0 to the rest of sigma(L_0)
  bool d2 = false;
  double theta = 0.0;         // fitted theta over |xi| <= xi_cut
  double xi_cut = 0.5;
  double worst_xi = 0.0;      // xi attaining the weakest margin
  double max_re_tail = 0.0;   // max Re sigma(L_xi) over |xi| >= xi_cut
};

// (D1): lambda = 0 simple eigenvalue of L_0 (within 1e-8, gap test).
// (D2): theta := min over sampled 0 < |xi| <= xi_cut of -max Re sigma / xi^2
// positive, and max Re sigma(L_xi) < 0 for |xi| >= xi_cut.
StabilityReport check_diffusive_stability(const WaveProfile& profile, int K,
                                          int xi_samples);

}  // namespace floq
