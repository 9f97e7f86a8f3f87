#include "floq/modulation.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

// Frequency-domain application of time-indexed kernel rows, one row per
// residue class modulo the period grid. Rows are stored as Fourier spectra;
// applying Sum_j w_j K(tau_{k-j}) g_j costs one spectrum product per
// (pair, residue) and one inverse FFT per (time, residue).
struct RowKernel {
  int N = 0;
  int m = 0;                         // residue classes per period
  std::vector<std::vector<CVec>> spectra;  // [tau index][residue] length N
};

// circular convolution out[i] = h * sum_d row[d] f[i-d], via spectra
// conv_hat = N * row_hat .* f_hat.

class DuhamelApplier {
 public:
  DuhamelApplier(const RowKernel* rows, double h)
      : rows_(rows), h_(h) {}

  // out[k] += sum over residues of IFFT( sum_j acc_{k}(freq) ), where the
  // caller accumulates acc via add_pair. Usage: reset(k); add_pair(tau_idx,
  // g_hat, w); finish -> grid function.
  void reset() {
    acc_.assign(rows_->m, CVec::Zero(rows_->N));
  }
  void add_pair(int tau_idx, const CVec& g_hat, double w) {
    for (int p = 0; p < rows_->m; ++p) {
      acc_[p].array() += w * rows_->spectra[tau_idx][p].array() * g_hat.array();
    }
  }
  RVec finish() const {
    const int N = rows_->N;
    RVec out = RVec::Zero(N);
    for (int p = 0; p < rows_->m; ++p) {
      if (acc_[p].cwiseAbs().maxCoeff() == 0.0) continue;
      CVec conv = fourier_synthesis(acc_[p]) * static_cast<double>(N);
      for (int i = p; i < N; i += rows_->m) out[i] = conv[i].real();
    }
    return out * h_;
  }

 private:
  const RowKernel* rows_;
  double h_;
  std::vector<CVec> acc_;
};

}  // namespace

std::vector<RVec> simulate_perturbation(
    const WaveProfile& profile, const std::function<double(double)>& u0,
    const std::vector<double>& times, double dt, int m_per_unit,
    int half_width, const std::function<double(double)>& beta) {
  if (profile.dimension() != 1) {
    throw std::invalid_argument("simulate_perturbation: scalar profiles only");
  }
  const int L = half_width;
  const int N = 2 * L * m_per_unit;
  const double h = 1.0 / m_per_unit;

  RVec u(N), c(N), b(N);
  for (int i = 0; i < N; ++i) {
    double x = -L + i * h;
    u[i] = u0(x);
    c[i] = profile.coeff_at(x - std::floor(x))(0, 0);
    b[i] = beta(x - std::floor(x));
  }

  const double T = times.back();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt)));
  const double dth = T / steps;
  CVec heat_half(N);
  for (int k = 0; k < N; ++k) {
    int m = fft_mode(k, N);
    double om = 2.0 * M_PI * m / (2.0 * L);
    heat_half[k] = std::exp(Complex(-om * om, profile.speed() * om) *
                            (0.5 * dth));
  }
  auto half_heat = [&]() {
    CVec uh = fourier_coefficients(u);
    uh.array() *= heat_half.array();
    u = fourier_synthesis(uh).real();
  };
  auto reaction = [&](double step) {
    for (int i = 0; i < N; ++i) {
      // exact flow of du/dt = c u + beta u^2 (Bernoulli)
      double ci = c[i], bi = b[i], ui = u[i];
      if (std::abs(ci) > 1e-12) {
        double ect = std::exp(ci * step);
        double den = ci + bi * ui * (1.0 - ect);
        if (den == 0.0) throw std::runtime_error("simulate_perturbation: blow-up");
        u[i] = ci * ui * ect / den;
      } else {
        double den = 1.0 - bi * ui * step;
        if (den <= 0.0) throw std::runtime_error("simulate_perturbation: blow-up");
        u[i] = ui / den;
      }
    }
  };

  std::vector<RVec> out;
  size_t next = 0;
  while (next < times.size() && times[next] <= 0.0) {
    out.push_back(u);
    ++next;
  }
  for (int s = 1; s <= steps; ++s) {
    half_heat();
    reaction(dth);
    half_heat();
    double t = s * dth;
    while (next < times.size() && times[next] <= t + 1e-9) {
      out.push_back(u);
      ++next;
    }
    if (u.cwiseAbs().maxCoeff() > 1e3) {
      throw std::runtime_error("simulate_perturbation: blow-up");
    }
  }
  while (next < times.size()) {
    out.push_back(u);
    ++next;
  }
  return out;
}

ModulationResult modulation_pipeline(const WaveProfile& profile,
                                     const SpectralBranch& branch,
                                     const InitialData& v0,
                                     const ModulationOptions& opts) {
  if (profile.dimension() != 1) {
    throw std::invalid_argument("modulation_pipeline: scalar profiles only");
  }
  if (branch.diffusion <= 0.0) {
    throw std::invalid_argument("modulation_pipeline: branch must have b > 0");
  }
  const double a = branch.drift;
  const double b = branch.diffusion;
  const double T = opts.T_final;
  const int n_s = static_cast<int>(std::round(T / opts.ds));
  const double ds = T / n_s;
  const int m = opts.m_per_unit;

  int L = opts.half_width;
  if (L <= 0) {
    double need = std::abs(a) * T + 10.0 * std::sqrt(std::max(1.0, b * T)) + 8.0;
    L = 1;
    while (L < need) L *= 2;
  }
  const int N = 2 * L * m;
  const double h = 1.0 / m;

  ModulationResult res;
  res.h = h;
  res.grid.resize(N);
  for (int i = 0; i < N; ++i) res.grid[i] = -L + i * h;

  LeadingKernel lead(branch);

  // ---- kernel rows: G(t_k) synthesized per xi by one eigendecomposition ----
  RowKernel gt_rows;  // Gt = G - E
  gt_rows.N = N;
  gt_rows.m = m;
  gt_rows.spectra.assign(n_s + 1, {});
  const int modes = 2 * opts.K + 1;

  std::vector<std::vector<RVec>> grow(n_s + 1);  // [k][p] row over d (real)
  for (int k = 1; k <= n_s; ++k) grow[k].assign(m, RVec::Zero(N));

  for (int q = 0; q < opts.n_xi; ++q) {
    const double xi = -M_PI + 2.0 * M_PI * q / opts.n_xi;
    CMat B = bloch_matrix(profile, xi, opts.K);
    Eigen::ComplexEigenSolver<CMat> es(B, true);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("modulation_pipeline: Bloch eigensolver failed");
    }
    CMat Vinv = es.eigenvectors().inverse();
    // basis values at the m points per period
    CMat F(m, modes);
    for (int p = 0; p < m; ++p) {
      for (int kk = 0; kk < modes; ++kk) {
        F(p, kk) = std::polar(1.0, 2.0 * M_PI * (kk - opts.K) * p * h);
      }
    }
    CMat FV = F * es.eigenvectors();       // m x modes
    CMat VinvF = Vinv * F.adjoint();       // modes x m
    for (int k = 1; k <= n_s; ++k) {
      const double t = k * ds;
      CVec ph(modes);
      for (int i = 0; i < modes; ++i) ph[i] = std::exp(es.eigenvalues()[i] * t);
      CMat Kxi = FV * ph.asDiagonal() * VinvF;  // m x m kernel on the cell
      // rows: row_p[d] += Re[(1/n_xi) e^{i xi d h} Kxi(p, (p-d) mod m)]
      for (int p = 0; p < m; ++p) {
        RVec& row = grow[k][p];
        for (int d = 0; d < N; ++d) {
          int dd = (d <= N / 2 - 1) ? d : d - N;  // signed offset
          int yresidue = ((p - dd) % m + m) % m;
          Complex val = std::polar(1.0, xi * dd * h) * Kxi(p, yresidue);
          row[d] += val.real() / opts.n_xi;
        }
      }
    }
  }

  // subtract the leading-term rows: E(x, t; y) = q0(x) kbar(x-y-at) qtilde(y)
  double split_err = 0.0;
  for (int k = 1; k <= n_s; ++k) {
    const double t = k * ds;
    for (int p = 0; p < m; ++p) {
      RVec erow(N);
      for (int d = 0; d < N; ++d) {
        int dd = (d <= N / 2 - 1) ? d : d - N;
        double x = p * h;
        double y = x - dd * h;
        erow[d] = lead.E(x, t, y)(0, 0);
      }
      RVec gtrow = grow[k][p] - erow;
      split_err = std::max(
          split_err, (grow[k][p] - (erow + gtrow)).cwiseAbs().maxCoeff());
      grow[k][p] = gtrow;
    }
    gt_rows.spectra[k].resize(m);
    for (int p = 0; p < m; ++p) {
      gt_rows.spectra[k][p] = fourier_coefficients(grow[k][p]);
    }
    grow[k].clear();
  }
  res.split_identity_error = split_err;

  // ---- analytic rows for e, e_x, e_xx, e_t: separable, qtilde times f ----
  // e_*(x, t; y) = rowfun(x - y; t) * qtilde(y), applied via conv(row, qt.*f)
  auto make_e_rows = [&](auto efun) {
    RowKernel rk;
    rk.N = N;
    rk.m = 1;
    rk.spectra.assign(n_s + 1, {});
    for (int k = 1; k <= n_s; ++k) {
      const double t = k * ds;
      RVec row(N);
      for (int d = 0; d < N; ++d) {
        int dd = (d <= N / 2 - 1) ? d : d - N;
        row[d] = efun(dd * h, t);
      }
      rk.spectra[k].resize(1);
      rk.spectra[k][0] = fourier_coefficients(row);
    }
    return rk;
  };
  // e rows without the qtilde factor (absorbed into the input function)
  auto kb = [&](double d, double t) {
    return lead.chi(t) *
           std::exp(-(d - a * t) * (d - a * t) / (4.0 * b * t)) /
           std::sqrt(4.0 * M_PI * b * t);
  };
  RowKernel e_rows = make_e_rows(kb);
  RowKernel ex_rows = make_e_rows([&](double d, double t) {
    return kb(d, t) * (-(d - a * t) / (2.0 * b * t));
  });
  RowKernel exx_rows = make_e_rows([&](double d, double t) {
    double dd = d - a * t;
    return kb(d, t) * (dd * dd / (4.0 * b * b * t * t) - 1.0 / (2.0 * b * t));
  });
  RowKernel et_rows = make_e_rows([&](double d, double t) {
    double dd = d - a * t;
    double f = -1.0 / (2.0 * t) + a * dd / (2.0 * b * t) +
               dd * dd / (4.0 * b * t * t);
    double base = std::exp(-dd * dd / (4.0 * b * t)) /
                  std::sqrt(4.0 * M_PI * b * t);
    return lead.chi(t) * base * f + lead.chi_prime(t) * base;
  });

  // grid samples of q0, qtilde, df(ubar), beta
  RVec q0g(N), qtg(N), cg(N), betag(N);
  for (int i = 0; i < N; ++i) {
    double x = res.grid[i];
    double xf = x - std::floor(x);
    q0g[i] = branch.q0_at(xf);
    qtg[i] = branch.qtilde0_at(xf);
    cg[i] = profile.coeff_at(xf)(0, 0);
    betag[i] = opts.beta(xf);
  }

  RVec v0g(N);
  for (int i = 0; i < N; ++i) v0g[i] = v0.sample(res.grid[i]);
  CVec v0_hat = fourier_coefficients(v0g);
  CVec v0qt_hat = fourier_coefficients(RVec(v0g.cwiseProduct(qtg)));

  res.times.resize(n_s + 1);
  for (int k = 0; k <= n_s; ++k) res.times[k] = k * ds;

  // ---- linear terms ----
  auto apply_single = [&](const RowKernel& rows, int k, const CVec& ghat) {
    DuhamelApplier ap(&rows, h);
    ap.reset();
    ap.add_pair(k, ghat, 1.0);
    return ap.finish();
  };
  std::vector<RVec> v_lin(n_s + 1), pt_lin(n_s + 1), px_lin(n_s + 1),
      pxx_lin(n_s + 1), p_lin(n_s + 1);
  v_lin[0] = v0g;
  p_lin[0] = pt_lin[0] = px_lin[0] = pxx_lin[0] = RVec::Zero(N);
  for (int k = 1; k <= n_s; ++k) {
    v_lin[k] = apply_single(gt_rows, k, v0_hat);
    p_lin[k] = -apply_single(e_rows, k, v0qt_hat);
    px_lin[k] = -apply_single(ex_rows, k, v0qt_hat);
    pxx_lin[k] = -apply_single(exx_rows, k, v0qt_hat);
    pt_lin[k] = -apply_single(et_rows, k, v0qt_hat);
  }

  // linear-case split identity: (v - q0 psi)(t) == int G(t) v0
  {
    double err = 0.0;
    for (int k = 1; k <= n_s; ++k) {
      const double t = k * ds;
      // int E(t) v0 = q0(x) * int kbar(x-y-at) qtilde(y) v0(y) dy
      RVec Ev = apply_single(e_rows, k, v0qt_hat).cwiseProduct(q0g);
      RVec lhs = v_lin[k] - q0g.cwiseProduct(p_lin[k]);
      RVec rhs = v_lin[k] + Ev;  // int G v0 = int Gt v0 + int E v0
      err = std::max(err, (lhs - rhs).cwiseAbs().maxCoeff());
      (void)t;
    }
    res.linear_identity_error = err;
  }

  // ---- Picard iteration ----
  std::vector<RVec> v = v_lin, pt = pt_lin, px = px_lin, pxx = pxx_lin;
  std::vector<RVec> Ncur(n_s + 1, RVec::Zero(N));
  std::vector<CVec> Nhat(n_s + 1), Nqt_hat(n_s + 1);

  auto compute_N = [&]() {
    double qc = 0.0;
    for (int k = 0; k <= n_s; ++k) {
      RVec Q = betag.cwiseProduct(v[k].cwiseProduct(v[k]));
      RVec S = v[k].cwiseProduct(px[k]);
      RVec vx = spectral_derivative(v[k], 1) / (2.0 * L);  // d/dx on [-L,L)
      RVec R(N);
      for (int i = 0; i < N; ++i) {
        double denom = 1.0 + px[k][i];
        R[i] = v[k][i] * pt[k][i] - v[k][i] * pxx[k][i] +
               (q0g[i] + vx[i]) * px[k][i] * px[k][i] / denom;
      }
      RVec Tt = (cg.cwiseProduct(v[k]) + Q).cwiseProduct(px[k]);
      RVec Rx = spectral_derivative(R, 1) / (2.0 * L);
      RVec Sxx = spectral_derivative(S, 2) / (4.0 * L * L);
      RVec St(N);
      if (k == 0) {
        St = (v[1].cwiseProduct(px[1]) - S) / ds;
      } else if (k == n_s) {
        St = (S - v[k - 1].cwiseProduct(px[k - 1])) / ds;
      } else {
        St = (v[k + 1].cwiseProduct(px[k + 1]) -
              v[k - 1].cwiseProduct(px[k - 1])) /
             (2.0 * ds);
      }
      Ncur[k] = Q + Rx - Sxx - St + Tt;
      double vh1 = std::sqrt(v[k].squaredNorm() * h + vx.squaredNorm() * h);
      if (vh1 > 0.0) {
        qc = std::max(qc, Q.cwiseAbs().sum() * h / (vh1 * vh1));
      }
      Nhat[k] = fourier_coefficients(Ncur[k]);
      Nqt_hat[k] = fourier_coefficients(RVec(Ncur[k].cwiseProduct(qtg)));
    }
    res.q_smallness_c = std::max(res.q_smallness_c, qc);
  };

  res.iterations = 0;
  res.converged = !opts.nonlinear;
  if (opts.nonlinear) {
    double prev_change = -1.0;
    int grow_count = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
      compute_N();
      double change = 0.0;
      for (int k = 1; k <= n_s; ++k) {
        // trapezoid over s_j: j = 0..k; j = k term uses Gt(0) = identity
        DuhamelApplier av(&gt_rows, h);
        av.reset();
        DuhamelApplier ae(&e_rows, h), aex(&ex_rows, h), aexx(&exx_rows, h),
            aet(&et_rows, h);
        ae.reset(); aex.reset(); aexx.reset(); aet.reset();
        for (int j = 0; j < k; ++j) {
          double w = (j == 0) ? 0.5 * ds : ds;
          av.add_pair(k - j, Nhat[j], w);
          ae.add_pair(k - j, Nqt_hat[j], w);
          aex.add_pair(k - j, Nqt_hat[j], w);
          aexx.add_pair(k - j, Nqt_hat[j], w);
          aet.add_pair(k - j, Nqt_hat[j], w);
        }
        RVec vn = v_lin[k] + av.finish() + 0.5 * ds * Ncur[k];
        RVec ptn = pt_lin[k] - aet.finish();
        RVec pxn = px_lin[k] - aex.finish();
        RVec pxxn = pxx_lin[k] - aexx.finish();
        change = std::max(change, (vn - v[k]).cwiseAbs().maxCoeff());
        change = std::max(change, (ptn - pt[k]).cwiseAbs().maxCoeff());
        change = std::max(change, (pxn - px[k]).cwiseAbs().maxCoeff());
        change = std::max(change, (pxxn - pxx[k]).cwiseAbs().maxCoeff());
        v[k] = vn;
        pt[k] = ptn;
        px[k] = pxn;
        pxx[k] = pxxn;
      }
      res.iteration_changes.push_back(change);
      ++res.iterations;
      if (change <= opts.conv_tol) {
        res.converged = true;
        break;
      }
      if (prev_change >= 0.0 && change > prev_change) {
        if (++grow_count >= 2) {
          res.diverging = true;
          break;
        }
      }
      prev_change = change;
    }
  } else {
    compute_N();
  }

  // psi from the e-kernel with the final N
  std::vector<RVec> psi(n_s + 1, RVec::Zero(N));
  for (int k = 1; k <= n_s; ++k) {
    DuhamelApplier ae(&e_rows, h);
    ae.reset();
    for (int j = 0; j < k && opts.nonlinear; ++j) {
      double w = (j == 0) ? 0.5 * ds : ds;
      ae.add_pair(k - j, Nqt_hat[j], w);
    }
    psi[k] = p_lin[k] - (opts.nonlinear ? ae.finish() : RVec::Zero(N));
  }

  // Ubar(s) = int N(y,s) qtilde(y) dy; Ubar* = Ubar0 + int Ubar ds
  res.Ubar0 = v0g.cwiseProduct(qtg).sum() * h;
  double intU = 0.0;
  for (int k = 0; k <= n_s; ++k) {
    double w = (k == 0 || k == n_s) ? 0.5 * ds : ds;
    intU += w * Ncur[k].cwiseProduct(qtg).sum() * h;
  }
  res.Ubar_star = res.Ubar0 + intU;

  // deviation of the reconstruction u = v - q0 psi from Ubar* q0 kbar
  res.dev_sup.resize(n_s + 1, 0.0);
  for (int k = 0; k <= n_s; ++k) {
    const double t = res.times[k];
    double sup = 0.0;
    for (int i = 0; i < N; ++i) {
      double u_rec = v[k][i] - q0g[i] * psi[k][i];
      double kb_val = (t > 0.0) ? std::exp(-(res.grid[i] - a * t) *
                                           (res.grid[i] - a * t) /
                                           (4.0 * b * t)) /
                                      std::sqrt(4.0 * M_PI * b * t)
                                : 0.0;
      sup = std::max(sup, std::abs(u_rec - res.Ubar_star * q0g[i] * kb_val));
    }
    res.dev_sup[k] = sup;
  }

  res.v = std::move(v);
  res.psi = std::move(psi);
  res.psi_t = std::move(pt);
  res.psi_x = std::move(px);
  res.psi_xx = std::move(pxx);
  res.N = std::move(Ncur);
  return res;
}

}  // namespace floq
