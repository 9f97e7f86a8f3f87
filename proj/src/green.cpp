#include "floq/green.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace floq {

double GreenField::max_imag() const {
  double m = 0.0;
  for (const CMat& v : values) m = std::max(m, v.imag().cwiseAbs().maxCoeff());
  return m;
}

CMat expm_times(const CMat& B, double t) {
  Eigen::ComplexEigenSolver<CMat> es(B, true);
  if (es.info() == Eigen::Success) {
    Eigen::FullPivLU<CMat> lu(es.eigenvectors());
    if (lu.isInvertible()) {
      double cond = es.eigenvectors().cwiseAbs().sum() *
                    lu.inverse().cwiseAbs().sum() / B.rows();
      if (cond < 1e8) {
        CVec ev = es.eigenvalues();
        CVec phases(ev.size());
        for (int i = 0; i < ev.size(); ++i) phases[i] = std::exp(ev[i] * t);
        return es.eigenvectors() * phases.asDiagonal() * lu.inverse();
      }
    }
  }
  CMat Bt = B * t;
  return Bt.exp();
}

namespace {

GreenField bloch_once(const WaveProfile& profile, double t,
                      const std::vector<double>& xs,
                      const std::vector<double>& ys, int K, int n_xi) {
  const int n = profile.dimension();
  const int modes = 2 * K + 1;
  GreenField f;
  f.route = GreenRoute::BlochQuadrature;
  f.t = t;
  f.n = n;
  f.xs = xs;
  f.ys = ys;
  f.values.assign(xs.size() * ys.size(), CMat::Zero(n, n));

  for (int m = 0; m < n_xi; ++m) {
    const double xi = -M_PI + 2.0 * M_PI * m / n_xi;
    CMat E = expm_times(bloch_matrix(profile, xi, K), t);
    // Right synthesis per y: R(y) = E (f_y kron I_n), f_y(l) = e^{-2pi i l y}.
    for (size_t j = 0; j < ys.size(); ++j) {
      CMat R = CMat::Zero(n * modes, n);
      for (int ll = 0; ll < modes; ++ll) {
        const Complex fy = std::polar(1.0, -2.0 * M_PI * (ll - K) * ys[j]);
        R.noalias() += E.middleCols(ll * n, n) * fy;
      }
      for (size_t i = 0; i < xs.size(); ++i) {
        CMat block = CMat::Zero(n, n);
        for (int kk = 0; kk < modes; ++kk) {
          const Complex gx = std::polar(1.0, 2.0 * M_PI * (kk - K) * xs[i]);
          block.noalias() += gx * R.middleRows(kk * n, n);
        }
        const Complex carrier = std::polar(1.0, xi * (xs[i] - ys[j]));
        f.values[i * ys.size() + j] +=
            (carrier / static_cast<double>(n_xi)) * block;
      }
    }
  }
  return f;
}

}  // namespace

GreenField green_bloch(const WaveProfile& profile, double t,
                       const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const BlochSynthOptions& opts) {
  if (t < opts.t_min) {
    throw std::invalid_argument(
        "green_bloch: t below t_min (inverse Bloch quadrature aliases for "
        "small t; use the direct or Laplace route)");
  }
  GreenField f = bloch_once(profile, t, xs, ys, opts.K, opts.n_xi);
  if (opts.verify_quadrature) {
    GreenField g = bloch_once(profile, t, xs, ys, opts.K, opts.n_xi / 2);
    double diff = 0.0;
    for (size_t k = 0; k < f.values.size(); ++k) {
      diff = std::max(diff, (f.values[k] - g.values[k]).cwiseAbs().maxCoeff());
    }
    if (diff > 1e-5) {
      throw std::runtime_error(
          "green_bloch: xi-quadrature not converged (doubling n_xi changes "
          "the result by " +
          std::to_string(diff) + ")");
    }
  }
  return f;
}

GreenField green_direct(const WaveProfile& profile, double t,
                        const std::vector<double>& xs,
                        const std::vector<double>& ys,
                        const DirectOptions& opts) {
  const int n = profile.dimension();
  double maxdist = 1.0;
  for (double x : xs) {
    for (double y : ys) maxdist = std::max(maxdist, std::abs(x - y));
  }
  int L = opts.half_width > 0
              ? opts.half_width
              : static_cast<int>(std::ceil(maxdist + 8.0 * std::sqrt(t) + 2.0));
  int N = 2 * L * opts.points_per_unit;

  // dt must resolve the reaction coupling at second order.
  const double dt0 = opts.dt;
  const int steps = std::max(1, static_cast<int>(std::ceil(t / dt0)));
  const double dt = t / steps;

  const double h = static_cast<double>(2 * L) / N;
  // Fourier multiplier of the half-step heat flow e^{(d^2 + a d) dt / 2}.
  CVec half_heat(N), full_heat(N);
  for (int k = 0; k < N; ++k) {
    int m = fft_mode(k, N);
    double om = 2.0 * M_PI * m / (2.0 * L);
    Complex symbol = Complex(-om * om, profile.speed() * om);
    half_heat[k] = std::exp(symbol * (0.5 * dt));
    full_heat[k] = std::exp(symbol * dt);
  }
  // Pointwise reaction step e^{df(ubar(x)) dt}.
  std::vector<Eigen::MatrixXd> reaction(N);
  for (int i = 0; i < N; ++i) {
    double x = -L + i * h;
    Eigen::MatrixXd c = profile.coeff_at(x - std::floor(x));
    reaction[i] = (c * dt).exp();
  }

  GreenField f;
  f.route = GreenRoute::DirectEvolution;
  f.t = t;
  f.n = n;
  f.xs = xs;
  f.ys = ys;
  f.values.assign(xs.size() * ys.size(), CMat::Zero(n, n));

  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * opts.sigma);
  for (size_t j = 0; j < ys.size(); ++j) {
    for (int col = 0; col < n; ++col) {
      // mollified delta in component `col` centered at ys[j]
      std::vector<CVec> u(n, CVec::Zero(N));
      for (int i = 0; i < N; ++i) {
        double x = -L + i * h;
        double d = x - ys[j];
        u[col][i] = norm * std::exp(-0.5 * d * d / (opts.sigma * opts.sigma));
      }
      auto heat = [&](const CVec& mult) {
        for (int c = 0; c < n; ++c) {
          CVec uh = fourier_coefficients(u[c]);
          uh.array() *= mult.array();
          u[c] = fourier_synthesis(uh);
        }
      };
      heat(half_heat);
      for (int s = 0; s < steps; ++s) {
        if (n == 1) {
          for (int i = 0; i < N; ++i) u[0][i] *= reaction[i](0, 0);
        } else {
          for (int i = 0; i < N; ++i) {
            Eigen::VectorXcd v(n);
            for (int c = 0; c < n; ++c) v[c] = u[c][i];
            v = reaction[i] * v;
            for (int c = 0; c < n; ++c) u[c][i] = v[c];
          }
        }
        heat(s + 1 < steps ? full_heat : half_heat);
        double amp = 0.0;
        for (int c = 0; c < n; ++c) amp = std::max(amp, u[c].cwiseAbs().maxCoeff());
        if (!std::isfinite(amp) || amp > 1e6 * norm) {
          throw std::runtime_error("green_direct: evolution unstable");
        }
      }
      // sample at xs by trigonometric interpolation
      std::vector<CVec> uhat(n);
      for (int c = 0; c < n; ++c) uhat[c] = fourier_coefficients(u[c]);
      for (size_t i = 0; i < xs.size(); ++i) {
        double xloc = (xs[i] + L) / (2.0 * L);  // position in [0,1)
        for (int c = 0; c < n; ++c) {
          Complex acc = 0.0;
          for (int k = 0; k < N; ++k) {
            int m = fft_mode(k, N);
            acc += uhat[c][k] * std::polar(1.0, 2.0 * M_PI * m * xloc);
          }
          f.values[i * ys.size() + j](c, col) = acc;
        }
      }
    }
  }
  return f;
}

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGL8x[8] = {-0.9602898564975363, -0.7966664774136267,
                             -0.5255324099163290, -0.1834346424956498,
                             0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
constexpr double kGL8w[8] = {0.1012285362903763, 0.2223810344533745,
                             0.3137066458778873, 0.3626837833783620,
                             0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};

}  // namespace

std::vector<CMat> green_laplace_points(
    const WaveProfile& profile, double t,
    const std::vector<std::pair<double, double>>& points,
    const LaplaceOptions& opts) {
  const int n = profile.dimension();
  if (8 * (opts.arc_panels + 2 * opts.ray_panels) < 64) {
    throw std::invalid_argument("green_laplace: need >= 64 contour nodes");
  }

  // Contour: lower ray, arc of |lambda| = R through +R, upper ray; the
  // ray-circle junction solves (th1 - th2 k)^2 + k^2 = R^2.
  const double th1 = opts.theta1, th2 = opts.theta2, R = opts.R;
  const double A = th2 * th2 + 1.0, B = -2.0 * th1 * th2,
               Cc = th1 * th1 - R * R;
  const double kR = (-B + std::sqrt(B * B - 4.0 * A * Cc)) / (2.0 * A);
  const double k_max = std::max(kR * 1.5, opts.cutoff / (th2 * t));
  const double phi_hi = std::atan2(kR, th1 - th2 * kR);

  // contour nodes (lambda, w * dlambda), oriented upward in Im lambda
  std::vector<std::pair<Complex, Complex>> nodes;
  auto add_panels = [&nodes](auto param, auto dparam,
                             const std::vector<double>& bounds) {
    for (size_t p = 0; p + 1 < bounds.size(); ++p) {
      double pa = bounds[p], pb = bounds[p + 1];
      for (int i = 0; i < 8; ++i) {
        double s = 0.5 * (pa + pb) + 0.5 * (pb - pa) * kGL8x[i];
        nodes.emplace_back(param(s),
                           dparam(s) * (0.5 * (pb - pa) * kGL8w[i]));
      }
    }
  };
  auto uniform = [](double a, double b, int panels) {
    std::vector<double> v(panels + 1);
    for (int i = 0; i <= panels; ++i) v[i] = a + (b - a) * i / panels;
    return v;
  };
  // geometric panel boundaries along the rays (integrand decays in k)
  auto geometric = [](double a, double b, int panels) {
    std::vector<double> v(panels + 1);
    for (int i = 0; i <= panels; ++i) {
      v[i] = a * std::pow(b / a, static_cast<double>(i) / panels);
    }
    return v;
  };
  // lower ray traversed from Im = -k_max up to -kR (k decreasing)
  add_panels([&](double k) { return Complex(th1 - th2 * k, -k); },
             [&](double) { return Complex(-th2, -1.0); },
             geometric(k_max, kR, opts.ray_panels));
  add_panels([&](double p) { return R * std::polar(1.0, p); },
             [&](double p) { return Complex(0.0, 1.0) * R * std::polar(1.0, p); },
             uniform(-phi_hi, phi_hi, opts.arc_panels));
  add_panels([&](double k) { return Complex(th1 - th2 * k, k); },
             [&](double) { return Complex(-th2, 1.0); },
             geometric(kR, k_max, opts.ray_panels));

  std::vector<CMat> total(points.size(), CMat::Zero(n, n));
  for (const auto& [lambda, wdl] : nodes) {
    Complex factor = std::exp(lambda * t) * wdl;
    if (std::abs(factor) < 1e-13) continue;
    for (int m = 0; m < opts.n_xi; ++m) {
      double xi = -M_PI + 2.0 * M_PI * m / opts.n_xi;
      FloquetSystem sys(profile, xi, lambda);
      KernelEngine engine(sys, opts.solve);
      for (size_t q = 0; q < points.size(); ++q) {
        auto [x, y] = points[q];
        double xf = x - std::floor(x), yf = y - std::floor(y);
        CMat stack = engine.periodic_stack(xf, yf);
        total[q] += (factor * std::polar(1.0, xi * (x - y)) /
                     static_cast<double>(opts.n_xi)) *
                    stack.topRows(n);
      }
    }
  }
  // G(x,t;y) = -(1/2 pi i) int_Gamma e^{lambda t} G_lambda dlambda, with
  // G_lambda(x,y) = (1/2pi) int e^{i xi (x-y)} G_{xi,lambda}(x,y) dxi and
  // Gamma upward, spectrum to its left.
  for (CMat& v : total) v /= Complex(0.0, -2.0 * M_PI);
  return total;
}

CMat green_laplace_point(const WaveProfile& profile, double t, double x,
                         double y, const LaplaceOptions& opts) {
  return green_laplace_points(profile, t, {{x, y}}, opts)[0];
}

LeadingKernel::LeadingKernel(const SpectralBranch& branch, bool apply_chi)
    : branch_(&branch),
      a_(branch.drift),
      b_(branch.diffusion),
      n_(branch.n),
      apply_chi_(apply_chi) {
  if (b_ <= 0.0) {
    throw std::invalid_argument("LeadingKernel: branch must have b > 0");
  }
}

namespace {
double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double bump_prime(double s) {
  return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0;
}
}  // namespace

double LeadingKernel::chi(double t) const {
  if (!apply_chi_) return 1.0;
  double s = t - 1.0;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return bump(s) / (bump(s) + bump(1.0 - s));
}

double LeadingKernel::chi_prime(double t) const {
  if (!apply_chi_) return 0.0;
  double s = t - 1.0;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double f = bump(s), g = bump(1.0 - s);
  double fp = bump_prime(s), gp = -bump_prime(1.0 - s);
  return (fp * g - f * gp) / ((f + g) * (f + g));
}

double LeadingKernel::gaussian(double x, double t, double y) const {
  double d = x - y - a_ * t;
  return std::exp(-d * d / (4.0 * b_ * t)) / std::sqrt(4.0 * M_PI * b_ * t);
}

Eigen::MatrixXd LeadingKernel::E(double x, double t, double y) const {
  double c = chi(t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  if (c == 0.0) return out;
  double g = gaussian(x, t, y) * c;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      out(i, j) = g * branch_->q0_at(x, i) * branch_->qtilde0_at(y, j);
    }
  }
  return out;
}

Eigen::RowVectorXd LeadingKernel::e(double x, double t, double y) const {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(n_);
  double c = chi(t);
  if (c == 0.0) return out;
  double g = gaussian(x, t, y) * c;
  for (int j = 0; j < n_; ++j) out[j] = g * branch_->qtilde0_at(y, j);
  return out;
}

Eigen::RowVectorXd LeadingKernel::e_x(double x, double t, double y) const {
  double d = x - y - a_ * t;
  return e(x, t, y) * (-d / (2.0 * b_ * t));
}

Eigen::RowVectorXd LeadingKernel::e_xx(double x, double t, double y) const {
  double d = x - y - a_ * t;
  double f = d * d / (4.0 * b_ * b_ * t * t) - 1.0 / (2.0 * b_ * t);
  return e(x, t, y) * f;
}

Eigen::RowVectorXd LeadingKernel::e_t(double x, double t, double y) const {
  double d = x - y - a_ * t;
  double f = -1.0 / (2.0 * t) + a_ * d / (2.0 * b_ * t) +
             d * d / (4.0 * b_ * t * t);
  Eigen::RowVectorXd out = e(x, t, y) * f;
  double cp = chi_prime(t);
  if (cp != 0.0) {
    double g = gaussian(x, t, y) * cp;
    for (int j = 0; j < n_; ++j) out[j] += g * branch_->qtilde0_at(y, j);
  }
  return out;
}

LeadingTermSplit leading_split(const std::vector<GreenField>& fields,
                               const SpectralBranch& branch) {
  LeadingKernel lead(branch, /*apply_chi=*/false);
  LeadingTermSplit out;

  std::vector<double> reg_z, lhs;
  std::vector<double> log_t;
  for (const GreenField& f : fields) {
    if (f.t < 2.0) continue;  // keep the chi-cutoff region out of the fits
    double sup = 0.0;
    for (size_t i = 0; i < f.xs.size(); ++i) {
      for (size_t j = 0; j < f.ys.size(); ++j) {
        Eigen::MatrixXd E = lead.E(f.xs[i], f.t, f.ys[j]);
        double r = (f.value(i, j) - E.cast<Complex>()).cwiseAbs().maxCoeff();
        sup = std::max(sup, r);
        double d = f.xs[i] - f.ys[j] - lead.drift() * f.t;
        if (r > 1e-13) {
          reg_z.push_back(d * d / f.t);
          lhs.push_back(std::log(r) + std::log(1.0 + f.t));
        }
      }
    }
    out.ts.push_back(f.t);
    out.sup_residual.push_back(sup);
  }
  if (out.ts.size() >= 2) {
    out.sup_slope = fit_loglog_slope(out.ts, out.sup_residual);
  }
  if (reg_z.size() >= 4) {
    // lhs = log C - z / M_res
    SlopeFit fit = fit_line(reg_z, lhs);
    out.C_res = std::exp(fit.intercept);
    out.M_res = (fit.slope < 0.0) ? -1.0 / fit.slope : -1.0;
    out.scatter = fit.scatter;
    out.shape_violation = !(out.M_res > 0.0);
  }
  return out;
}

}  // namespace floq
