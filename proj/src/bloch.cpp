#include "floq/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace floq {

CMat bloch_matrix(const WaveProfile& profile, double xi, int K) {
  if (K < 8) throw std::invalid_argument("bloch_matrix: K must be >= 8");
  double tail = profile.coeff_fourier_tail(std::min(K, profile.grid_size() / 2));
  if (tail > 1e-10) {
    throw std::invalid_argument(
        "bloch_matrix: coefficient Fourier tail above 1e-10 is truncated; "
        "increase K");
  }
  const int n = profile.dimension();
  const int modes = 2 * K + 1;
  CMat B = CMat::Zero(n * modes, n * modes);
  for (int kk = 0; kk < modes; ++kk) {
    const int k = kk - K;
    const Complex d(0.0, 2.0 * M_PI * k + xi);
    const Complex symbol = d * d + profile.speed() * d;
    for (int c = 0; c < n; ++c) B(kk * n + c, kk * n + c) = symbol;
    for (int ll = 0; ll < modes; ++ll) {
      const int m = k - (ll - K);
      if (std::abs(m) > profile.grid_size() / 2) continue;
      Eigen::MatrixXcd Chat = profile.coeff_fourier(m);
      B.block(kk * n, ll * n, n, n) += Chat;
    }
  }
  return B;
}

BlochEigs bloch_spectrum(const WaveProfile& profile, double xi, int K) {
  CMat B = bloch_matrix(profile, xi, K);
  Eigen::ComplexEigenSolver<CMat> es(B, true);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("bloch_spectrum: eigensolver failed");
  }
  const int m = static_cast<int>(B.rows());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  CVec vals = es.eigenvalues();
  const double tie = 1e-9 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::sort(order.begin(), order.end(), [&vals, tie](int a, int b) {
    if (std::abs(vals[a].real() - vals[b].real()) > tie) {
      return vals[a].real() > vals[b].real();
    }
    return vals[a].imag() < vals[b].imag();
  });
  BlochEigs out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  for (int i = 0; i < m; ++i) {
    out.values[i] = vals[order[i]];
    out.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  return out;
}

CVec bloch_eigenfunction_at(const CVec& coeffs, int n, int K, double x) {
  CVec v = CVec::Zero(n);
  for (int kk = 0; kk <= 2 * K; ++kk) {
    const int k = kk - K;
    const Complex phase = std::polar(1.0, 2.0 * M_PI * k * x);
    for (int c = 0; c < n; ++c) v[c] += coeffs[kk * n + c] * phase;
  }
  return v;
}

StabilityReport check_diffusive_stability(const WaveProfile& profile, int K,
                                          int xi_samples) {
  if (xi_samples < 32) {
    throw std::invalid_argument("check_diffusive_stability: xi_samples >= 32");
  }
  StabilityReport rep;

  BlochEigs at0 = bloch_spectrum(profile, 0.0, K);
  int zero_idx = 0;
  double best = std::abs(at0.values[0]);
  for (int i = 1; i < at0.values.size(); ++i) {
    double m = std::abs(at0.values[i]);
    if (m < best) {
      best = m;
      zero_idx = i;
    }
  }
  rep.zero_eig_abs = best;
  rep.gap = 1e300;
  for (int i = 0; i < at0.values.size(); ++i) {
    if (i == zero_idx) continue;
    rep.gap = std::min(rep.gap, std::abs(at0.values[i] - at0.values[zero_idx]));
  }
  rep.d1 = (rep.zero_eig_abs < 1e-8) && (rep.gap > 1e-6);

  rep.theta = 1e300;
  rep.max_re_tail = -1e300;
  double worst_margin = 1e300;
  for (int s = 0; s < xi_samples; ++s) {
    double xi = -M_PI + 2.0 * M_PI * (s + 0.5) / xi_samples;
    if (std::abs(xi) < 1e-12) continue;
    BlochEigs eg = bloch_spectrum(profile, xi, K);
    double max_re = eg.values[0].real();
    if (std::abs(xi) <= rep.xi_cut) {
      double theta_here = -max_re / (xi * xi);
      if (theta_here < rep.theta) {
        rep.theta = theta_here;
        if (theta_here < worst_margin) {
          worst_margin = theta_here;
          rep.worst_xi = xi;
        }
      }
    } else {
      rep.max_re_tail = std::max(rep.max_re_tail, max_re);
      if (max_re >= 0.0) rep.worst_xi = xi;
    }
  }
  rep.d2 = (rep.theta > 0.0) && (rep.max_re_tail < 0.0);
  return rep;
}

}  // namespace floq
