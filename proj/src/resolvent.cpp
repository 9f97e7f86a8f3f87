#include "floq/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "floq/fit.hpp"

namespace floq {

namespace {

Complex coef_stable(Complex m) { return 1.0 / (1.0 - m); }

Complex coef_unstable(Complex m) {
  // m/(1-m) without overflow for large |m|
  if (std::abs(m) > 2.0) return -1.0 / (1.0 - 1.0 / m);
  return m / (1.0 - m);
}

}  // namespace

KernelEngine::KernelEngine(const FloquetSystem& sys, const SolveOptions& opts)
    : sys_(sys), opts_(opts) {
  const double al = std::abs(sys.lambda);
  rescaled_ = opts.auto_rescale && al > opts.rescale_threshold;
  scale_ = rescaled_ ? std::sqrt(al) : 1.0;
  if (scale_ > 700.0) {
    throw std::invalid_argument("KernelEngine: |lambda| beyond representable "
                                "range (increase precision or reduce lambda)");
  }
  // Growth-rate bound per work unit, used for drift-control checkpoints.
  double rate;
  if (rescaled_) {
    rate = 1.2;
  } else {
    double cmax = 0.0;
    for (int i = 0; i < sys.profile->grid_size(); ++i) {
      cmax = std::max(cmax, sys.profile->coeff(i).cwiseAbs().maxCoeff());
    }
    rate = std::sqrt(al + cmax + sys.xi * sys.xi) +
           0.5 * std::abs(Complex(sys.profile->speed(), 2.0 * sys.xi));
    rate = std::max(rate, 1.0);
  }
  checkpoint_ = 6.0 / rate;
}

void KernelEngine::fill_work_coefficient(double w, CMat& out) const {
  if (rescaled_) {
    sys_.fill_coefficient_rescaled(w, out);
  } else {
    sys_.fill_coefficient(w, out);
  }
}

const KernelEngine::Split& KernelEngine::split_at(double base_x) {
  double frac = base_x - std::floor(base_x);
  long long key = sys_.profile->is_constant_coeff()
                      ? 0
                      : llround(frac * (1 << 20));
  auto it = split_cache_.find(key);
  if (it != split_cache_.end()) return it->second;

  const int n = sys_.n;
  const int m = 2 * n;
  const double w0 = frac * scale_;
  const double P = scale_;  // period in work coordinates
  auto A = [this](double w, CMat& out) { fill_work_coefficient(w, out); };

  CMat fwd = integrate_matrix_ode_filled(A, w0, w0 + P, CMat::Identity(m, m),
                                         opts_.tol).value;
  CMat bwd = integrate_matrix_ode_filled(A, w0 + P, w0, CMat::Identity(m, m),
                                         opts_.tol).value;

  Eigen::ComplexEigenSolver<CMat> ef(fwd, true);
  Eigen::ComplexEigenSolver<CMat> eb(bwd, true);
  if (ef.info() != Eigen::Success || eb.info() != Eigen::Success) {
    throw std::runtime_error("KernelEngine: monodromy eigensolver failed");
  }

  // n dominant eigenpairs of the forward monodromy -> unstable family;
  // n dominant of the backward monodromy -> stable family (m = 1/r).
  auto dominant = [m](const Eigen::ComplexEigenSolver<CMat>& es, int count) {
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&es](int a, int b) {
      return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });
    idx.resize(count);
    return idx;
  };
  std::vector<int> ui = dominant(ef, n);
  std::vector<int> si = dominant(eb, n);

  Split sp;
  sp.stable_mult.resize(n);
  sp.unstable_mult.resize(n);
  sp.W.resize(m, m);
  for (int c = 0; c < n; ++c) {
    sp.stable_mult[c] = 1.0 / eb.eigenvalues()[si[c]];
    sp.W.col(c) = eb.eigenvectors().col(si[c]);
    sp.unstable_mult[c] = ef.eigenvalues()[ui[c]];
    sp.W.col(n + c) = ef.eigenvectors().col(ui[c]);
  }
  for (int c = 0; c < n; ++c) {
    double ms = std::abs(sp.stable_mult[c]);
    double mu = std::abs(sp.unstable_mult[c]);
    if (std::abs(ms - 1.0) < 1e-6 || std::abs(mu - 1.0) < 1e-6 || ms >= mu) {
      throw std::runtime_error(
          "KernelEngine: Floquet multiplier within 1e-6 of the unit circle "
          "(lambda is numerically in the spectrum of L_xi); |m|-1 = " +
          std::to_string(std::min(std::abs(ms - 1.0), std::abs(mu - 1.0))));
    }
  }
  Eigen::FullPivLU<CMat> lu(sp.W);
  if (!lu.isInvertible()) {
    throw std::runtime_error("KernelEngine: degenerate stable/unstable basis");
  }
  sp.Winv = lu.inverse();
  return split_cache_.emplace(key, std::move(sp)).first->second;
}

namespace {

struct Track {
  std::vector<CMat> value;               // renormalized bundle per offset
  std::vector<Eigen::VectorXd> logscale; // accumulated column log-scales
};

// Integrate the bundle V0 from work-coordinate base over the signed offsets
// (sorted by increasing magnitude, uniform sign), renormalizing columns and
// applying the drift-control projector every `checkpoint` work units.
Track sweep_bundle(const std::function<void(double, CMat&)>& A, double base_w,
                   const std::vector<double>& offsets_w, const CMat& V0,
                   double tol, double checkpoint,
                   const std::function<CMat(double)>& projector_at) {
  Track tr;
  const int cols = static_cast<int>(V0.cols());
  CMat F = V0;
  Eigen::VectorXd ls = Eigen::VectorXd::Zero(cols);
  double pos = 0.0;  // traveled distance (absolute)
  double since_cp = 0.0;

  auto renormalize = [&]() {
    for (int c = 0; c < cols; ++c) {
      double s = F.col(c).cwiseAbs().maxCoeff();
      if (s > 0.0 && std::isfinite(s)) {
        F.col(c) /= s;
        ls[c] += std::log(s);
      }
    }
  };

  for (double d : offsets_w) {
    const double target = std::abs(d);
    const double sign = (d >= 0.0) ? 1.0 : -1.0;
    while (checkpoint > 0.0 && target - pos > checkpoint - since_cp + 1e-12) {
      double step = checkpoint - since_cp;
      F = integrate_matrix_ode_filled(A, base_w + sign * pos,
                                      base_w + sign * (pos + step), F, tol)
              .value;
      pos += step;
      F = projector_at(base_w + sign * pos) * F;
      renormalize();
      since_cp = 0.0;
    }
    if (target > pos) {
      F = integrate_matrix_ode_filled(A, base_w + sign * pos,
                                      base_w + sign * target, F, tol).value;
      since_cp += target - pos;
      pos = target;
      renormalize();
    }
    tr.value.push_back(F);
    tr.logscale.push_back(ls);
  }
  return tr;
}

}  // namespace

std::vector<CMat> KernelEngine::stacks(double y, const std::vector<double>& ds,
                                       bool periodic) {
  const int n = sys_.n;
  const Split& sp = split_at(y);
  const double base_w = (y - std::floor(y)) * scale_ + std::floor(y) * scale_;

  // Offsets for the stable (forward) and unstable (backward) sweeps. For the
  // periodic kernel the x <= y branch reuses the forward sweep at d + 1 and
  // the x > y branch reuses the backward sweep at d - 1.
  std::vector<double> sd, ud;  // physical offsets per input index
  sd.reserve(ds.size());
  ud.reserve(ds.size());
  for (double d : ds) {
    if (periodic) {
      if (d < -1.0 - 1e-12 || d > 1.0 + 1e-12) {
        throw std::invalid_argument("periodic kernel: x - y must be in [-1,1]");
      }
      sd.push_back(d > 0.0 ? d : d + 1.0);
      ud.push_back(d > 0.0 ? d - 1.0 : d);
    } else {
      sd.push_back(d > 0.0 ? d : 0.0);   // stable used only for x > y
      ud.push_back(d > 0.0 ? 0.0 : d);   // unstable only for x <= y
    }
  }

  auto sorted_unique = [](std::vector<double> v, bool ascending) {
    std::sort(v.begin(), v.end());
    if (!ascending) std::reverse(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<double> s_off = sorted_unique(sd, true);
  std::vector<double> u_off = sorted_unique(ud, false);

  auto A = [this](double w, CMat& out) { fill_work_coefficient(w, out); };
  auto stable_proj = [this](double w) {
    const Split& s = split_at(w / scale_);
    CMat D = CMat::Zero(s.W.rows(), s.W.cols());
    for (int c = 0; c < sys_.n; ++c) D(c, c) = 1.0;
    return CMat(s.W * D * s.Winv);
  };
  auto unstable_proj = [this](double w) {
    const Split& s = split_at(w / scale_);
    CMat D = CMat::Zero(s.W.rows(), s.W.cols());
    for (int c = 0; c < sys_.n; ++c) D(sys_.n + c, sys_.n + c) = 1.0;
    return CMat(s.W * D * s.Winv);
  };

  std::vector<double> s_off_w(s_off), u_off_w(u_off);
  for (double& v : s_off_w) v *= scale_;
  for (double& v : u_off_w) v *= scale_;

  Track st = sweep_bundle(A, base_w, s_off_w, sp.W.leftCols(n), opts_.tol,
                          checkpoint_, stable_proj);
  Track ut = sweep_bundle(A, base_w, u_off_w, sp.W.rightCols(n), opts_.tol,
                          checkpoint_, unstable_proj);

  auto find_index = [](const std::vector<double>& v, double d) {
    auto it = std::find(v.begin(), v.end(), d);
    return static_cast<int>(it - v.begin());
  };

  std::vector<CMat> out;
  out.reserve(ds.size());
  for (size_t q = 0; q < ds.size(); ++q) {
    const double d = ds[q];
    CMat stack = CMat::Zero(2 * n, n);
    const bool upper = d > 0.0;
    // stable contribution
    if (periodic || upper) {
      int is = find_index(s_off, sd[q]);
      for (int c = 0; c < n; ++c) {
        Complex coef = periodic ? coef_stable(sp.stable_mult[c]) : Complex(1.0);
        double sc = std::exp(st.logscale[is][c]);
        if (!(sc > 0.0) || !std::isfinite(sc)) continue;
        stack.noalias() += (coef * sc) * st.value[is].col(c) *
                           sp.Winv.row(c).tail(n);
      }
    }
    // unstable contribution
    if (periodic || !upper) {
      int iu = find_index(u_off, ud[q]);
      for (int c = 0; c < n; ++c) {
        Complex coef = periodic ? coef_unstable(sp.unstable_mult[c])
                                : Complex(-1.0);
        double sc = std::exp(ut.logscale[iu][c]);
        if (!(sc > 0.0) || !std::isfinite(sc)) continue;
        stack.noalias() += (coef * sc) * ut.value[iu].col(c) *
                           sp.Winv.row(n + c).tail(n);
      }
    }
    if (rescaled_) stack.topRows(n) /= scale_;
    out.push_back(std::move(stack));
  }
  return out;
}

std::vector<CMat> KernelEngine::periodic_stacks(double y,
                                                const std::vector<double>& ds) {
  return stacks(y, ds, true);
}

std::vector<CMat> KernelEngine::whole_line_stacks(
    double y, const std::vector<double>& ds) {
  return stacks(y, ds, false);
}

CMat KernelEngine::periodic_stack(double x, double y) {
  return stacks(y, {x - y}, true)[0];
}

CMat KernelEngine::whole_line_stack(double x, double y) {
  return stacks(y, {x - y}, false)[0];
}

DichotomyProjections KernelEngine::projections(double base_y) {
  const Split& sp = split_at(base_y);
  const int n = sys_.n;
  const int m = 2 * n;
  CMat D = CMat::Zero(m, m);
  for (int c = 0; c < n; ++c) D(c, c) = 1.0;
  CMat Pi = sp.W * D * sp.Winv;
  if (rescaled_) {
    // Map back through N1 . N1^{-1} (conjugation by diag(s^{-1} I, I)).
    Pi.topRows(n) /= scale_;
    Pi.leftCols(n) *= scale_;
  }
  DichotomyProjections out;
  out.base_y = base_y;
  out.Pi_plus = Pi;
  out.Pi_minus = CMat::Identity(m, m) - Pi;
  out.stable_multipliers = sp.stable_mult;
  out.unstable_multipliers = sp.unstable_mult;
  out.stable_basis = sp.W.leftCols(n);
  out.unstable_basis = sp.W.rightCols(n);
  return out;
}

DichotomyProjections dichotomy_projections(const FloquetSystem& sys,
                                           double base_y,
                                           const SolveOptions& opts) {
  KernelEngine engine(sys, opts);
  return engine.projections(base_y);
}

namespace {

KernelField evaluate_field(const FloquetSystem& sys,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys,
                           const SolveOptions& opts, bool periodic) {
  KernelEngine engine(sys, opts);
  KernelField f;
  f.kind = periodic ? KernelField::Kind::Periodic : KernelField::Kind::WholeLine;
  f.xi = sys.xi;
  f.lambda = sys.lambda;
  f.n = sys.n;
  f.xs = xs;
  f.ys = ys;
  f.stack.resize(xs.size() * ys.size());
  for (size_t j = 0; j < ys.size(); ++j) {
    std::vector<double> ds(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) ds[i] = xs[i] - ys[j];
    std::vector<CMat> col = periodic ? engine.periodic_stacks(ys[j], ds)
                                     : engine.whole_line_stacks(ys[j], ds);
    for (size_t i = 0; i < xs.size(); ++i) {
      f.stack[i * ys.size() + j] = std::move(col[i]);
    }
  }
  return f;
}

}  // namespace

KernelField whole_line_kernel(const FloquetSystem& sys,
                              const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const SolveOptions& opts) {
  return evaluate_field(sys, xs, ys, opts, false);
}

KernelField periodic_kernel(const FloquetSystem& sys,
                            const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const SolveOptions& opts) {
  return evaluate_field(sys, xs, ys, opts, true);
}

ImagesCheck method_of_images_check(const FloquetSystem& sys, int J,
                                   const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   const SolveOptions& opts) {
  if (J < 1) throw std::invalid_argument("method_of_images_check: J >= 1");
  KernelField per = periodic_kernel(sys, xs, ys, opts);

  KernelEngine engine(sys, opts);
  const int n = sys.n;

  // Gw(x, y+j) = Gw(x - j, y) by integer translation invariance.
  ImagesCheck out;
  out.deviation_by_j.assign(J + 1, 0.0);
  std::vector<double> image_max(J + 1, 0.0);

  for (size_t jy = 0; jy < ys.size(); ++jy) {
    std::vector<double> ds;
    ds.reserve(xs.size() * (2 * J + 1));
    for (double x : xs) {
      for (int j = -J; j <= J; ++j) ds.push_back(x - ys[jy] - j);
    }
    std::vector<CMat> w = engine.whole_line_stacks(ys[jy], ds);
    for (size_t ix = 0; ix < xs.size(); ++ix) {
      CMat acc = CMat::Zero(2 * n, n);
      // accumulate j = 0, then +-1, ... tracking deviation per truncation
      const CMat& target = per.stack_at(ix, jy);
      for (int lvl = 0; lvl <= J; ++lvl) {
        for (int j = -lvl; j <= lvl; ++j) {
          if (std::abs(j) != lvl) continue;
          const CMat& term = w[ix * (2 * J + 1) + (j + J)];
          acc += term;
          image_max[lvl] =
              std::max(image_max[lvl], term.topRows(n).cwiseAbs().maxCoeff());
        }
        double dev = (acc - target).cwiseAbs().maxCoeff();
        out.deviation_by_j[lvl] = std::max(out.deviation_by_j[lvl], dev);
      }
    }
  }
  out.max_deviation = out.deviation_by_j[J];

  // Decay rate of the image terms; require it positive.
  std::vector<double> js, logm;
  for (int j = 1; j <= J; ++j) {
    if (image_max[j] > 0.0) {
      js.push_back(j);
      logm.push_back(std::log(image_max[j]));
    }
  }
  if (js.size() < 2) {
    throw std::runtime_error("method_of_images_check: kernel not decaying");
  }
  SlopeFit fit = fit_line(js, logm);
  out.decay_rate = -fit.slope;
  if (out.decay_rate <= 0.0) {
    throw std::runtime_error("method_of_images_check: kernel not decaying");
  }
  double K = std::exp(fit.intercept);
  out.tail_bound = K * std::exp(-out.decay_rate * (J + 1)) /
                   (1.0 - std::exp(-out.decay_rate));
  return out;
}

HighFrequencyFit high_frequency_modulus_check(
    const WaveProfile& profile, double xi, const std::vector<Complex>& lambdas,
    int n_offsets, const SolveOptions& opts) {
  if (n_offsets < 4) {
    throw std::invalid_argument("high_frequency_modulus_check: n_offsets >= 4");
  }
  HighFrequencyFit out;
  std::vector<double> reg, lhs;  // regressor |l|^{1/2} * delta, response
  const double y0 = 0.3;
  for (Complex l : lambdas) {
    FloquetSystem sys(profile, xi, l);
    KernelEngine engine(sys, opts);
    double s = std::sqrt(std::abs(l));
    double dmax = std::min(0.45, 25.0 / s);
    std::vector<double> ds(n_offsets);
    for (int k = 0; k < n_offsets; ++k) {
      ds[k] = -dmax * (k + 0.0) / (n_offsets - 1);  // x <= y side; d=0 included
    }
    std::vector<CMat> stacks = engine.periodic_stacks(y0, ds);
    double sup = 0.0;
    for (int k = 0; k < n_offsets; ++k) {
      double g = stacks[k].topRows(sys.n).cwiseAbs().maxCoeff();
      sup = std::max(sup, g * s);
      if (g > 0.0 && std::isfinite(g)) {
        reg.push_back(s * std::abs(ds[k]));
        lhs.push_back(std::log(g) + 0.5 * std::log(std::abs(l)));
      }
    }
    out.sup_scaled.push_back(sup);
  }
  if (reg.size() < 8) {
    throw std::runtime_error("high_frequency_modulus_check: fit failure "
                             "(kernel non-finite)");
  }
  SlopeFit fit = fit_line(reg, lhs);
  out.C = std::exp(fit.intercept);
  out.rate = -fit.slope;
  out.scatter = fit.scatter;
  return out;
}

}  // namespace floq
