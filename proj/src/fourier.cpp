#include "floq/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace floq {

namespace {

// FFTW planner is not thread-safe; execution of a plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

CVec run_dft(const CVec& in, int sign) {
  const int n = static_cast<int>(in.size());
  if (n < 2) throw std::invalid_argument("fourier: need at least 2 samples");
  CVec out(n);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(
        n,
        reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), sign,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

CVec fourier_coefficients(const CVec& samples) {
  CVec c = run_dft(samples, FFTW_FORWARD);
  c /= static_cast<double>(samples.size());
  return c;
}

CVec fourier_coefficients(const RVec& samples) {
  CVec tmp = samples.cast<Complex>();
  return fourier_coefficients(tmp);
}

CVec fourier_synthesis(const CVec& coeffs) {
  return run_dft(coeffs, FFTW_BACKWARD);
}

RVec spectral_derivative(const RVec& samples, int order) {
  const int n = static_cast<int>(samples.size());
  CVec c = fourier_coefficients(samples);
  for (int k = 0; k < n; ++k) {
    const int m = fft_mode(k, n);
    if (order % 2 == 1 && m == -n / 2) {
      c[k] = 0.0;  // Nyquist mode has no well-defined odd derivative
      continue;
    }
    Complex factor = Complex(0.0, 2.0 * M_PI * m);
    Complex p = 1.0;
    for (int j = 0; j < order; ++j) p *= factor;
    c[k] *= p;
  }
  return fourier_synthesis(c).real();
}

TrigInterp::TrigInterp(const RVec& samples)
    : n_(static_cast<int>(samples.size())),
      coeffs_(fourier_coefficients(samples)) {
  // trim modes below rounding relative to the sample scale
  double scale = std::max(1e-300, samples.cwiseAbs().maxCoeff());
  top_mode_ = 0;
  for (int m = 1; m <= n_ / 2; ++m) {
    if (std::abs(coeffs_[m]) > 1e-15 * scale) top_mode_ = m;
  }
}

double TrigInterp::operator()(double x) const {
  // c_0 + sum_{m=1}^{N/2-1} 2 Re(c_m e^{2pi i m x}) + Re(c_{N/2}) cos(pi N x)
  double value = coeffs_[0].real();
  if (top_mode_ == 0) return value;
  const Complex rot = std::polar(1.0, 2.0 * M_PI * x);
  Complex phase = rot;
  for (int m = 1; m <= std::min(top_mode_, n_ / 2 - 1); ++m) {
    value += 2.0 * std::real(coeffs_[m] * phase);
    phase *= rot;
  }
  if (top_mode_ == n_ / 2) {
    value += coeffs_[n_ / 2].real() * std::cos(M_PI * n_ * x);
  }
  return value;
}

}  // namespace floq
