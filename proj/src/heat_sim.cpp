#include "floq/heat_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

double heat_kernel(double x, double t) {
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

double InitialData::sample(double x) const {
  switch (cls) {
    case DataClass::WeightedL1H1:
      // All of |u0|_{L1}, |u0|_{H1}, |x u0|_{L1} are <= E0 for this shape.
      return 0.5 * E0 * std::exp(-x * x);
    case DataClass::GaussianEnvelope:
      return E0 * std::exp(-x * x / M);
    case DataClass::AlgebraicEnvelope:
      return E0 * std::pow(1.0 + std::abs(x), -r);
  }
  return 0.0;
}

namespace {

int auto_half_width(const InitialData& u0, double T) {
  // Gaussian spreading tail below 1e-12 at the boundary; algebraic data
  // additionally needs the envelope itself below 1e-8 relative to E0.
  double L = std::max(8.0 * std::sqrt(std::max(1.0, T)),
                      std::sqrt(4.0 * std::max(1.0, T) * std::log(1e12)));
  if (u0.cls == DataClass::AlgebraicEnvelope) {
    L = std::max(L, std::pow(1e8, 1.0 / u0.r));
  }
  int Li = 1;
  while (Li < L) Li *= 2;
  return Li;
}

double signed_pow(double u, int p) {
  double a = std::pow(std::abs(u), p);
  return (u < 0.0 && p % 2 == 1) ? -a : a;
}

}  // namespace

void step_heat_q(RVec& u, const CVec& heat_half, double dt, int q,
                 double blowup_guard, bool reaction_on) {
  const int N = static_cast<int>(u.size());
  auto half_heat = [&]() {
    CVec uh = fourier_coefficients(u);
    uh.array() *= heat_half.array();
    u = fourier_synthesis(uh).real();
  };
  half_heat();
  if (reaction_on) {
    for (int i = 0; i < N; ++i) {
      // exact flow of du/dt = u^q: u -> u (1-(q-1) dt u^{q-1})^{-1/(q-1)}
      double w = signed_pow(u[i], q - 1);
      double base = 1.0 - (q - 1) * dt * w;
      if (base <= 0.0) {
        throw std::runtime_error("step_heat_q: blow-up guard triggered");
      }
      u[i] *= std::pow(base, -1.0 / (q - 1));
    }
  }
  half_heat();
  if (u.cwiseAbs().maxCoeff() > blowup_guard) {
    throw std::runtime_error("step_heat_q: blow-up guard triggered");
  }
}

HeatSimResult simulate_heat_q(const InitialData& u0, int q, double T_final,
                              const std::vector<double>& snapshot_times,
                              const HeatSimOptions& opts) {
  if (q < 4) throw std::invalid_argument("simulate_heat_q: q >= 4");
  HeatSimResult res;
  res.half_width =
      opts.half_width > 0 ? opts.half_width : auto_half_width(u0, T_final);
  const int L = res.half_width;
  const int N = 2 * L * opts.points_per_unit;
  res.grid_size = N;
  res.h = static_cast<double>(2 * L) / N;

  RVec u(N);
  for (int i = 0; i < N; ++i) u[i] = u0.sample(-L + i * res.h);
  res.U0 = u.sum() * res.h;

  const int steps = std::max(1, static_cast<int>(std::ceil(T_final / opts.dt)));
  const double dt = T_final / steps;
  CVec heat_half(N);
  for (int k = 0; k < N; ++k) {
    int m = fft_mode(k, N);
    double om = 2.0 * M_PI * m / (2.0 * L);
    heat_half[k] = std::exp(-om * om * dt * 0.5);
  }

  auto record = [&](double t) {
    res.times.push_back(t);
    res.l1.push_back(u.cwiseAbs().sum() * res.h);
    res.l2.push_back(std::sqrt(u.squaredNorm() * res.h));
    res.linf.push_back(u.cwiseAbs().maxCoeff());
    double Us = 0.0;
    for (int i = 0; i < N; ++i) Us += signed_pow(u[i], q);
    res.U.push_back(Us * res.h);
  };
  record(0.0);

  std::vector<double> snaps = snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
    res.snapshot_times.push_back(0.0);
    res.snapshots.push_back(u);
    ++next_snap;
  }

  // record norms on a time grid dense enough for slope fits
  const int n_records = 400;
  double prev_U = res.U.back();
  for (int s = 1; s <= steps; ++s) {
    step_heat_q(u, heat_half, dt, q, opts.blowup_guard, opts.reaction_on);
    double t = s * dt;
    double Us = 0.0;
    for (int i = 0; i < N; ++i) Us += signed_pow(u[i], q);
    Us *= res.h;
    res.int_U += 0.5 * (prev_U + Us) * dt;
    prev_U = Us;
    if (s % std::max(1, steps / n_records) == 0 || s == steps) record(t);
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
      res.snapshot_times.push_back(t);
      res.snapshots.push_back(u);
      ++next_snap;
    }
  }
  return res;
}

DecayReport decay_report_heat(const InitialData& u0, int q, double T_final,
                              const std::vector<int>& p_list,
                              const HeatSimOptions& opts) {
  if (u0.E0 > 0.05) {
    throw std::invalid_argument("decay_report_heat: E0 <= 0.05 required");
  }
  // snapshots log-spaced over [1, T]
  std::vector<double> snaps;
  const int n_snap = 25;
  for (int i = 0; i < n_snap; ++i) {
    snaps.push_back(std::exp(std::log(1.0) + (std::log(T_final) - 0.0) * i /
                                                  (n_snap - 1)));
  }
  HeatSimResult sim = simulate_heat_q(u0, q, T_final, snaps, opts);

  DecayReport rep;
  rep.q = q;
  rep.E0 = u0.E0;
  rep.U0 = sim.U0;

  // U(s) decay slope on [5, T] and the analytic tail from the last decade.
  {
    std::vector<double> ts, us;
    for (size_t i = 0; i < sim.times.size(); ++i) {
      if (sim.times[i] >= 5.0 && std::abs(sim.U[i]) > 0.0) {
        ts.push_back(sim.times[i]);
        us.push_back(std::abs(sim.U[i]));
      }
    }
    if (ts.size() >= 4) rep.U_slope = fit_loglog_slope(ts, us);
    double Chat = 0.0;
    int count = 0;
    for (size_t i = 0; i < sim.times.size(); ++i) {
      if (sim.times[i] >= T_final / 10.0) {
        Chat += std::abs(sim.U[i]) * std::pow(1.0 + sim.times[i], 1.5);
        ++count;
      }
    }
    if (count > 0) Chat /= count;
    rep.U_star_tail = 2.0 * Chat / std::sqrt(1.0 + T_final);
    // increments of int_0^T U must be Cauchy; flag non-convergence
    if (!(std::abs(rep.U_star_tail) < std::abs(sim.int_U) + 1e3)) {
      throw std::runtime_error("decay_report_heat: U* tail not converging");
    }
  }
  rep.U_star = sim.U0 + sim.int_U + rep.U_star_tail;

  rep.times = sim.snapshot_times;
  for (int p : p_list) {
    rep.norms[p] = {};
    rep.deviations[p] = {};
  }

  for (size_t si = 0; si < sim.snapshots.size(); ++si) {
    const RVec& u = sim.snapshots[si];
    const double t = sim.snapshot_times[si];
    RVec dev(u.size());
    for (int i = 0; i < u.size(); ++i) {
      dev[i] = u[i] - rep.U_star * heat_kernel(sim.grid_point(i), t);
    }
    for (int p : p_list) {
      double n_u, n_d;
      if (p == 0) {
        n_u = u.cwiseAbs().maxCoeff();
        n_d = dev.cwiseAbs().maxCoeff();
      } else if (p == 1) {
        n_u = u.cwiseAbs().sum() * sim.h;
        n_d = dev.cwiseAbs().sum() * sim.h;
      } else {
        n_u = std::pow(u.cwiseAbs().array().pow(p).sum() * sim.h, 1.0 / p);
        n_d = std::pow(dev.cwiseAbs().array().pow(p).sum() * sim.h, 1.0 / p);
      }
      rep.norms[p].push_back(n_u);
      rep.deviations[p].push_back(n_d);
    }

    if (u0.cls == DataClass::GaussianEnvelope && t >= 1.0) {
      // ratio bound with M'' = 4 M at sampled x
      const double Mpp = 4.0 * u0.M;
      for (int k = 0; k < 4; ++k) {
        double x = k * std::sqrt(u0.M * (1.0 + t)) / 2.0;
        int i = static_cast<int>((x + sim.half_width) / sim.h);
        if (i < 0 || i >= u.size()) continue;
        double d = std::abs(u[i] - rep.U_star * heat_kernel(sim.grid_point(i), t));
        double ratio = d * (1.0 + t) *
                       std::exp(sim.grid_point(i) * sim.grid_point(i) /
                                (Mpp * (1.0 + t))) /
                       (1.0 + std::log(1.0 + t));
        rep.pointwise_ratios.push_back(ratio);
      }
    }
  }

  // slope fits over t in [10, T]
  for (int p : p_list) {
    std::vector<double> ts, nu, nd;
    for (size_t i = 0; i < rep.times.size(); ++i) {
      if (rep.times[i] >= 10.0) {
        ts.push_back(rep.times[i]);
        nu.push_back(rep.norms[p][i]);
        nd.push_back(rep.deviations[p][i]);
      }
    }
    if (ts.size() >= 4) {
      rep.norm_slopes[p] = fit_loglog_slope(ts, nu);
      rep.dev_slopes[p] = fit_loglog_slope(ts, nd);
    }
  }

  if (u0.cls == DataClass::GaussianEnvelope && rep.pointwise_ratios.size() > 8) {
    std::vector<double> ts, rs;
    size_t k = 0;
    for (size_t si = 0; si < sim.snapshot_times.size(); ++si) {
      if (sim.snapshot_times[si] < 1.0) continue;
      for (int j = 0; j < 4 && k < rep.pointwise_ratios.size(); ++j, ++k) {
        if (rep.pointwise_ratios[k] > 0.0) {
          ts.push_back(1.0 + sim.snapshot_times[si]);
          rs.push_back(rep.pointwise_ratios[k]);
        }
      }
    }
    if (ts.size() >= 4) rep.pointwise_trend = fit_loglog_slope(ts, rs);
  }

  if (u0.cls == DataClass::AlgebraicEnvelope) {
    // envelope |u - U* k| <= C [(1+t)^{-1/2}(1+|x|+sqrt t)^{-r+1}
    //                           + (1+t)^{-1} e^{-x^2/(M''(1+t))}]
    const double Mpp = 16.0;
    auto decade = [&](double lo, double hi) {
      EnvelopeDecadeFit fit;
      fit.t_lo = lo;
      fit.t_hi = hi;
      for (size_t si = 0; si < sim.snapshots.size(); ++si) {
        double t = sim.snapshot_times[si];
        if (t < lo || t > hi) continue;
        const RVec& u = sim.snapshots[si];
        for (int i = 0; i < u.size(); i += 7) {
          double x = sim.grid_point(i);
          if (std::abs(x) > 6.0 * std::sqrt(1.0 + t) + 10.0) continue;
          double d = std::abs(u[i] - rep.U_star * heat_kernel(x, t));
          double env =
              std::pow(1.0 + t, -0.5) *
                  std::pow(1.0 + std::abs(x) + std::sqrt(t), -u0.r + 1.0) +
              std::exp(-x * x / (Mpp * (1.0 + t))) / (1.0 + t);
          fit.constant = std::max(fit.constant, d / (env * u0.E0));
        }
      }
      return fit;
    };
    double hi = T_final;
    while (hi >= 40.0) {
      rep.envelope_decades.push_back(decade(hi / 10.0, hi));
      hi /= 10.0;
    }
  }
  return rep;
}

}  // namespace floq
