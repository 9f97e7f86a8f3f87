#include "floq/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace floq {

FloquetSystem::FloquetSystem(const WaveProfile& prof, double xi_, Complex l)
    : profile(&prof), xi(xi_), lambda(l), n(prof.dimension()) {}

void FloquetSystem::fill_coefficient(double x, CMat& A) const {
  const int m = 2 * n;
  A.setZero(m, m);
  const Complex axi = -(profile->speed() + Complex(0.0, 2.0 * xi));
  const Complex shift = -(Complex(0.0, profile->speed() * xi) - xi * xi);
  for (int i = 0; i < n; ++i) {
    A(i, n + i) = 1.0;
    A(n + i, n + i) = axi;
    for (int j = 0; j < n; ++j) A(n + i, j) = -profile->coeff_entry_at(i, j, x);
    A(n + i, i) += lambda + shift;
  }
}

CMat FloquetSystem::coefficient(double x) const {
  CMat A;
  fill_coefficient(x, A);
  return A;
}

void FloquetSystem::fill_coefficient_rescaled(double xbar, CMat& A) const {
  const int m = 2 * n;
  const double s = rescale_factor();
  const Complex lbar = lambda / std::abs(lambda);
  A.setZero(m, m);
  const Complex axi = -(profile->speed() + Complex(0.0, 2.0 * xi));
  const Complex shift = -(Complex(0.0, profile->speed() * xi) - xi * xi);
  const double inv_l = 1.0 / std::abs(lambda);
  const double x = xbar / s;
  for (int i = 0; i < n; ++i) {
    A(i, n + i) = 1.0;
    A(n + i, n + i) = axi / s;
    for (int j = 0; j < n; ++j) {
      A(n + i, j) = -profile->coeff_entry_at(i, j, x) * inv_l;
    }
    A(n + i, i) += lbar + shift * inv_l;
  }
}

CMat FloquetSystem::coefficient_rescaled(double xbar) const {
  CMat A;
  fill_coefficient_rescaled(xbar, A);
  return A;
}

double FloquetSystem::rescale_factor() const { return std::sqrt(std::abs(lambda)); }

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

}  // namespace

OdeResult integrate_matrix_ode_filled(
    const std::function<void(double, CMat&)>& fill, double y, double x,
    const CMat& init, double tol) {
  if (tol < 1e-14 || tol > 1e-3) {
    throw std::invalid_argument("integrate_matrix_ode: tol out of range");
  }
  OdeResult res;
  res.value = init;
  if (x == y) return res;

  const double dir = (x > y) ? 1.0 : -1.0;
  const double span = std::abs(x - y);
  const int rows = static_cast<int>(init.rows());
  const int cols = static_cast<int>(init.cols());
  double t = y;

  CMat A(rows, rows), M = init, stage(rows, cols), y5(rows, cols),
      err_mat(rows, cols);
  CMat k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols),
      k5(rows, cols), k6(rows, cols), k7(rows, cols);

  fill(t, A);
  double anorm0 = A.cwiseAbs().maxCoeff();
  double h = dir * std::min(span, 0.5 / std::max(1.0, anorm0));
  const double hmin = span * 1e-14;
  k1.noalias() = A * M;

  int steps = 0;
  const int max_steps = 2000000;
  while (dir * (x - t) > 0.0) {
    if (std::abs(h) < hmin) {
      throw std::runtime_error(
          "integrate_matrix_ode: step-size underflow (lambda too stiff for "
          "tolerance; consider rescaled variables)");
    }
    if (dir * (t + h - x) > 0.0) h = x - t;

    stage = M + (h * a21) * k1;
    fill(t + c2 * h, A);
    k2.noalias() = A * stage;
    stage = M + h * (a31 * k1 + a32 * k2);
    fill(t + c3 * h, A);
    k3.noalias() = A * stage;
    stage = M + h * (a41 * k1 + a42 * k2 + a43 * k3);
    fill(t + c4 * h, A);
    k4.noalias() = A * stage;
    stage = M + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    fill(t + c5 * h, A);
    k5.noalias() = A * stage;
    stage = M + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    fill(t + h, A);
    k6.noalias() = A * stage;
    y5 = M + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7.noalias() = A * y5;  // A already at t + h
    err_mat = h * ((b1 - e1) * k1 + (b3 - e3) * k3 + (b4 - e4) * k4 +
                   (b5 - e5) * k5 + (b6 - e6) * k6 - e7 * k7);

    double scale2 = std::max(M.cwiseAbs2().maxCoeff(), y5.cwiseAbs2().maxCoeff());
    double scale = std::max(std::sqrt(scale2), 1e-290);
    double err = std::sqrt(err_mat.cwiseAbs2().maxCoeff()) / scale;
    // error-per-unit-step keeps the accumulated error near tol over the span
    double target = std::max(tol * std::abs(h) / span, 5e-15);

    if (err <= target) {
      t += h;
      M.swap(y5);
      k1.swap(k7);  // FSAL
      res.error_estimate += err * scale;
    }
    double factor = 0.9 * std::pow(target / std::max(err, 1e-300), 0.2);
    factor = std::clamp(factor, 0.2, 5.0);
    h *= factor;
    if (++steps > max_steps) {
      throw std::runtime_error("integrate_matrix_ode: too many steps");
    }
  }
  res.value = M;
  return res;
}

OdeResult integrate_matrix_ode(const std::function<CMat(double)>& A, double y,
                               double x, const CMat& init, double tol) {
  return integrate_matrix_ode_filled(
      [&A](double t, CMat& out) { out = A(t); }, y, x, init, tol);
}

PropagatorMatrix solution_operator(const FloquetSystem& sys, double y, double x,
                                   const SolveOptions& opts) {
  if (opts.tol < 1e-13 || opts.tol > 1e-4) {
    throw std::invalid_argument("solution_operator: tol must be in [1e-13, 1e-4]");
  }
  PropagatorMatrix P;
  P.from_y = y;
  P.to_x = x;
  const int m = 2 * sys.n;
  if (opts.auto_rescale && std::abs(sys.lambda) > opts.rescale_threshold) {
    const double s = sys.rescale_factor();
    auto Abar = [&sys](double xb, CMat& out) {
      sys.fill_coefficient_rescaled(xb, out);
    };
    OdeResult r = integrate_matrix_ode_filled(Abar, s * y, s * x,
                                              CMat::Identity(m, m), opts.tol);
    // F^{y->x} = N1 Fbar^{s y -> s x} N2,  N1 = diag(s^{-1} I, I),
    // N2 = diag(s I, I).
    CMat F = r.value;
    const int n = sys.n;
    F.topRows(n) /= s;
    F.leftCols(n) *= s;
    P.matrix = F;
    P.error_estimate = r.error_estimate;
    return P;
  }
  auto A = [&sys](double t, CMat& out) { sys.fill_coefficient(t, out); };
  OdeResult r =
      integrate_matrix_ode_filled(A, y, x, CMat::Identity(m, m), opts.tol);
  P.matrix = r.value;
  P.error_estimate = r.error_estimate;
  return P;
}

PropagatorMatrix monodromy(const FloquetSystem& sys, double base_y,
                           const SolveOptions& opts) {
  return solution_operator(sys, base_y, base_y + 1.0, opts);
}

CVec floquet_multipliers(const CMat& monodromy_matrix) {
  Eigen::ComplexEigenSolver<CMat> es(monodromy_matrix, false);
  CVec mults = es.eigenvalues();
  std::vector<Complex> v(mults.data(), mults.data() + mults.size());
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
  for (int i = 0; i < mults.size(); ++i) mults[i] = v[i];
  return mults;
}

Complex evans(const WaveProfile& profile, Complex lambda, double xi,
              double tol) {
  if (std::abs(xi) > M_PI + 1e-12) {
    throw std::invalid_argument("evans: |xi| must be <= pi");
  }
  FloquetSystem sys(profile, 0.0, lambda);
  SolveOptions o;
  o.tol = tol;
  PropagatorMatrix psi = monodromy(sys, 0.0, o);
  const int m = 2 * profile.dimension();
  CMat D = psi.matrix - std::polar(1.0, xi) * CMat::Identity(m, m);
  return D.determinant();
}

Complex evans_root(const WaveProfile& profile, double xi, Complex lambda0,
                   double tol, int max_iter) {
  Complex l = lambda0;
  for (int it = 0; it < max_iter; ++it) {
    Complex d = evans(profile, l, xi);
    double h = std::max(1e-7, 1e-7 * std::abs(l));
    Complex dp = (evans(profile, l + h, xi) - evans(profile, l - h, xi)) /
                 (2.0 * h);
    if (std::abs(dp) == 0.0) break;
    Complex step = d / dp;
    l -= step;
    if (std::abs(step) < tol * std::max(1.0, std::abs(l))) return l;
  }
  return l;
}

int winding_number(const WaveProfile& profile, double xi,
                   const std::vector<Complex>& contour, double tol) {
  if (contour.size() < 3) {
    throw std::invalid_argument("winding_number: contour needs >= 3 vertices");
  }
  // Refine the polyline until consecutive Evans values rotate by < pi/2.
  std::vector<Complex> pts = contour;
  if (std::abs(pts.front() - pts.back()) > 0.0) pts.push_back(pts.front());

  std::vector<Complex> vals(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    vals[i] = evans(profile, pts[i], xi, tol);
  }
  for (int pass = 0; pass < 24; ++pass) {
    bool refined = false;
    std::vector<Complex> np, nv;
    np.reserve(pts.size() * 2);
    nv.reserve(pts.size() * 2);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (std::abs(vals[i]) < 1e-10) {
        throw std::runtime_error("winding_number: zero on contour");
      }
      np.push_back(pts[i]);
      nv.push_back(vals[i]);
      double dphi = std::abs(std::arg(vals[i + 1] / vals[i]));
      if (dphi > M_PI / 2.0) {
        Complex mid = 0.5 * (pts[i] + pts[i + 1]);
        np.push_back(mid);
        nv.push_back(evans(profile, mid, xi, tol));
        refined = true;
      }
    }
    np.push_back(pts.back());
    nv.push_back(vals.back());
    pts.swap(np);
    vals.swap(nv);
    if (!refined) break;
    if (pass == 23) {
      throw std::runtime_error("winding_number: contour refinement failed");
    }
  }
  if (std::abs(vals.back()) < 1e-10) {
    throw std::runtime_error("winding_number: zero on contour");
  }
  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    total += std::arg(vals[i + 1] / vals[i]);
  }
  double w = total / (2.0 * M_PI);
  int wi = static_cast<int>(std::lround(w));
  if (std::abs(w - wi) > 0.25) {
    throw std::runtime_error("winding_number: non-integer winding estimate");
  }
  return wi;
}

}  // namespace floq
