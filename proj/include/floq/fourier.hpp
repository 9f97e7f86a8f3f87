#pragma once

// Periodic spectral utilities built on FFTW: forward/inverse transforms,
// spectral differentiation, and trigonometric interpolation off the grid.
// Convention: samples f_j = f(j/N) on [0,1); coefficients c_k with
// f(x) = sum_k c_k e^{2 pi i k x}, k = -N/2 .. N/2-1.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace floq {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Forward DFT with the 1/N normalization above. Input length must be >= 2.
CVec fourier_coefficients(const CVec& samples);
CVec fourier_coefficients(const RVec& samples);

// Inverse of fourier_coefficients (coefficients -> samples on j/N grid).
CVec fourier_synthesis(const CVec& coeffs);

// Signed mode number for FFT bin k of an N-point transform (-N/2 .. N/2-1).
inline int fft_mode(int k, int n) { return (k <= n / 2 - 1) ? k : k - n; }

// Spectral derivative of order `order` of real periodic samples on [0,1).
// Exact for trigonometric polynomials below the Nyquist mode; the Nyquist
// coefficient is zeroed for odd orders.
RVec spectral_derivative(const RVec& samples, int order = 1);

// Trigonometric interpolant evaluation at arbitrary x (real samples).
// Matches the samples exactly at grid points; uses the cosine convention
// for the Nyquist mode so the interpolant is real.
class TrigInterp {
 public:
  TrigInterp() = default;
  explicit TrigInterp(const RVec& samples);
  double operator()(double x) const;
  int size() const { return n_; }

 private:
  int n_ = 0;
  int top_mode_ = 0;
  CVec coeffs_;
};

}  // namespace floq
