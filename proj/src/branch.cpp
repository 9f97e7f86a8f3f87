#include "floq/branch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "floq/fit.hpp"

namespace floq {

namespace {

struct TrackPoint {
  Complex lambda;
  CVec right;  // Fourier coefficients
  CVec left;   // bilinear left eigenvector (row of V^{-1}), as a column
};

// Eigen-pair of L_xi nearest to `predicted`, with its bilinear left vector.
TrackPoint nearest_pair(const WaveProfile& profile, double xi, int K,
                        Complex predicted) {
  BlochEigs eg = bloch_spectrum(profile, xi, K);
  int best = 0, second = -1;
  double bd = 1e300, sd = 1e300;
  for (int i = 0; i < eg.values.size(); ++i) {
    double d = std::abs(eg.values[i] - predicted);
    if (d < bd) {
      second = best;
      sd = bd;
      best = i;
      bd = d;
    } else if (d < sd) {
      second = i;
      sd = d;
    }
  }
  if (second >= 0 && std::abs(eg.values[best] - eg.values[second]) < 1e-6) {
    throw std::runtime_error("critical_branch: branch collision at xi = " +
                             std::to_string(xi));
  }
  TrackPoint tp;
  tp.lambda = eg.values[best];
  tp.right = eg.vectors.col(best);
  CMat Vinv = eg.vectors.inverse();
  tp.left = Vinv.row(best).transpose();
  return tp;
}

// Continuation from (xi_from, known lambda) to xi_to, halving the step on
// ambiguity. Returns the tracked pair at xi_to.
TrackPoint track_to(const WaveProfile& profile, int K, double xi_from,
                    Complex lambda_from, double xi_to, int depth = 0) {
  try {
    return nearest_pair(profile, xi_to, K, lambda_from);
  } catch (const std::runtime_error&) {
    if (depth >= 6) throw;
    double mid = 0.5 * (xi_from + xi_to);
    TrackPoint m = track_to(profile, K, xi_from, lambda_from, mid, depth + 1);
    return track_to(profile, K, mid, m.lambda, xi_to, depth + 1);
  }
}

std::vector<TrigInterp> synthesize_components(const CVec& coeffs, int n, int K,
                                              int nx) {
  std::vector<TrigInterp> out;
  for (int c = 0; c < n; ++c) {
    RVec samples(nx);
    for (int i = 0; i < nx; ++i) {
      CVec v = bloch_eigenfunction_at(coeffs, n, K, static_cast<double>(i) / nx);
      samples[i] = v[c].real();
    }
    out.emplace_back(samples);
  }
  return out;
}

}  // namespace

SpectralBranch critical_branch(const WaveProfile& profile, int K, double xi_max,
                               int n_xi) {
  if (xi_max <= 0.0 || xi_max > M_PI) {
    throw std::invalid_argument("critical_branch: xi_max in (0, pi]");
  }
  if (n_xi < 5) throw std::invalid_argument("critical_branch: n_xi >= 5");

  const int n = profile.dimension();
  const int nx = profile.grid_size();

  // (D1) at xi = 0: smallest eigenvalue must vanish.
  BlochEigs at0 = bloch_spectrum(profile, 0.0, K);
  int zi = 0;
  double zb = std::abs(at0.values[0]);
  for (int i = 1; i < at0.values.size(); ++i) {
    if (std::abs(at0.values[i]) < zb) {
      zb = std::abs(at0.values[i]);
      zi = i;
    }
  }
  if (zb > 1e-8) {
    throw std::runtime_error(
        "critical_branch: lambda(0) != 0; (D1) not satisfied");
  }

  SpectralBranch br;
  br.n = n;
  br.K = K;

  // xi grid: requested grid merged with the fit window grid (>= 21 points on
  // |xi| <= min(xi_max, 0.1 pi)), symmetric around 0.
  const double fit_window = std::min(xi_max, 0.1 * M_PI);
  std::set<double> grid;
  grid.insert(0.0);
  int half = n_xi / 2;
  for (int i = 1; i <= half; ++i) {
    double x = xi_max * i / half;
    grid.insert(x);
    grid.insert(-x);
  }
  for (int i = 1; i <= 10; ++i) {
    double x = fit_window * i / 10.0;
    grid.insert(x);
    grid.insert(-x);
  }

  // Zero-mode eigen-pair at xi = 0.
  TrackPoint base;
  base.lambda = at0.values[zi];
  base.right = at0.vectors.col(zi);
  {
    CMat Vinv = at0.vectors.inverse();
    base.left = Vinv.row(zi).transpose();
  }

  // Rotate the zero mode to be real, then pin it to ubar' (or the surrogate
  // zero mode for manufactured profiles): q(x,0) = ubar'(x) exactly.
  {
    int imax;
    base.right.cwiseAbs().maxCoeff(&imax);
    // q real <=> coefficients Hermitian: c_{-k} = conj(c_k). Rotate by the
    // phase of the sample at x=0 projection instead: evaluate at a point.
    CVec v0 = bloch_eigenfunction_at(base.right, n, K, 0.13);
    Complex phase = v0[0] / std::abs(v0[0]);
    base.right /= phase;
    base.left *= phase;
    if (profile.has_derivative_samples()) {
      // LLS scale alpha so that alpha*q matches the stored derivative samples.
      double num = 0.0, den = 0.0;
      for (int i = 0; i < nx; ++i) {
        CVec q = bloch_eigenfunction_at(base.right, n, K,
                                        static_cast<double>(i) / nx);
        for (int c = 0; c < n; ++c) {
          num += profile.derivative_sample(i)[c] * q[c].real();
          den += q[c].real() * q[c].real();
        }
      }
      double alpha = num / den;
      base.right *= alpha;
      base.left /= alpha;
      br.surrogate_zero_mode =
          (profile.source() == ProfileSource::Manufactured);
    }
  }

  br.q0 = synthesize_components(base.right, n, K, nx);
  {
    // qtilde(y) = conj(sum_k w_k e^{-2 pi i k y}) so that <qtilde, q>_L2 = 1.
    std::vector<TrigInterp> qt;
    for (int c = 0; c < n; ++c) {
      RVec samples(nx);
      for (int i = 0; i < nx; ++i) {
        double y = static_cast<double>(i) / nx;
        Complex acc = 0.0;
        for (int kk = 0; kk <= 2 * K; ++kk) {
          int k = kk - K;
          acc += base.left[kk * n + c] * std::polar(1.0, -2.0 * M_PI * k * y);
        }
        samples[i] = std::conj(acc).real();
      }
      qt.emplace_back(samples);
    }
    br.qtilde0 = std::move(qt);
  }

  // Track outward in both directions.
  std::map<double, TrackPoint> tracked;
  tracked[0.0] = base;
  std::vector<double> pos, neg;
  for (double x : grid) {
    if (x > 0) pos.push_back(x);
    if (x < 0) neg.push_back(x);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end(), std::greater<double>());
  double prev_xi = 0.0;
  Complex prev_lambda = base.lambda;
  for (double x : pos) {
    TrackPoint tp = track_to(profile, K, prev_xi, prev_lambda, x);
    tracked[x] = tp;
    prev_xi = x;
    prev_lambda = tp.lambda;
  }
  prev_xi = 0.0;
  prev_lambda = base.lambda;
  for (double x : neg) {
    TrackPoint tp = track_to(profile, K, prev_xi, prev_lambda, x);
    tracked[x] = tp;
    prev_xi = x;
    prev_lambda = tp.lambda;
  }

  for (auto& [x, tp] : tracked) {
    // Phase-fix q(.,xi) against q(.,0): maximal real inner product.
    Complex inner = 0.0;
    for (int i = 0; i < tp.right.size(); ++i) {
      inner += std::conj(base.right[i]) * tp.right[i];
    }
    if (std::abs(inner) > 0.0) {
      Complex phase = inner / std::abs(inner);
      tp.right /= phase;
      tp.left *= phase;
    }
    br.xi_grid.push_back(x);
    br.lambda_values.push_back(tp.lambda);
    br.q_coeffs.push_back(tp.right);
    br.qtilde_coeffs.push_back(tp.left);
  }

  // lambda_1, lambda_2 from the cubic fit lambda ~ l1 xi + l2 xi^2 + l3 xi^3
  // on the fit window.
  std::vector<double> fx;
  std::vector<Complex> fl;
  for (size_t i = 0; i < br.xi_grid.size(); ++i) {
    if (std::abs(br.xi_grid[i]) <= fit_window + 1e-12) {
      fx.push_back(br.xi_grid[i]);
      fl.push_back(br.lambda_values[i]);
    }
  }
  if (fx.size() < 9) {
    throw std::runtime_error("critical_branch: too few points in fit window");
  }
  Eigen::MatrixXcd B(fx.size(), 3);
  CVec rhs(fx.size());
  for (size_t i = 0; i < fx.size(); ++i) {
    B(i, 0) = fx[i];
    B(i, 1) = fx[i] * fx[i];
    B(i, 2) = fx[i] * fx[i] * fx[i];
    rhs[i] = fl[i];
  }
  CVec c = lls_fit(B, rhs);
  br.lambda1 = c[0];
  br.lambda2 = c[1];
  br.fit_residual = (rhs - B * c).cwiseAbs().maxCoeff();
  br.drift = (Complex(0.0, 1.0) * br.lambda1).real();
  br.diffusion = -br.lambda2.real();
  return br;
}

}  // namespace floq
