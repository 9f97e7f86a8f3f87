#include <cmath>

#include "doctest.h"
#include "floq/modulation.hpp"

using namespace floq;

namespace {

ModulationOptions fast_options() {
  ModulationOptions o;
  o.T_final = 10.0;
  o.ds = 0.5;
  o.m_per_unit = 16;
  o.half_width = 32;
  o.K = 16;
  o.n_xi = 64;
  return o;
}

}  // namespace

TEST_CASE("zero data is a fixed point") {
  WaveProfile man = manufactured_profile(0.3, 1.0, 64);
  SpectralBranch br = critical_branch(man, 16, 0.1 * M_PI, 21);
  InitialData v0;
  v0.cls = DataClass::GaussianEnvelope;
  v0.E0 = 0.0;
  ModulationResult r = modulation_pipeline(man, br, v0, fast_options());
  CHECK(r.converged);
  for (const RVec& v : r.v) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
  for (const RVec& p : r.psi) CHECK(p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear split identities hold to bookkeeping accuracy") {
  // advection-diffusion fixture, N == 0: v = int Gt v0, psi = -int e v0,
  // and v - q0 psi reproduces int G v0 through G = E + Gt.
  WaveProfile adv = advection_diffusion_profile(1.0, 64);
  SpectralBranch br = critical_branch(adv, 16, 0.1 * M_PI, 21);
  InitialData v0;
  v0.cls = DataClass::GaussianEnvelope;
  v0.E0 = 0.01;
  v0.M = 2.0;
  ModulationOptions o = fast_options();
  o.nonlinear = false;
  o.beta = [](double) { return 0.0; };
  ModulationResult r = modulation_pipeline(adv, br, v0, o);
  CHECK(r.split_identity_error < 1e-10);
  CHECK(r.linear_identity_error < 1e-10);
}

TEST_CASE("Picard iteration contracts in the smallness regime") {
  WaveProfile man = manufactured_profile(0.3, 1.0, 64);
  SpectralBranch br = critical_branch(man, 16, 0.1 * M_PI, 21);
  InitialData v0;
  v0.cls = DataClass::GaussianEnvelope;
  v0.E0 = 0.005;
  v0.M = 2.0;
  ModulationOptions o = fast_options();
  o.T_final = 20.0;
  o.half_width = 64;
  ModulationResult r = modulation_pipeline(man, br, v0, o);
  CHECK(r.converged);
  CHECK(!r.diverging);
  REQUIRE(r.iteration_changes.size() >= 2);
  for (size_t i = 1; i < r.iteration_changes.size(); ++i) {
    if (r.iteration_changes[i - 1] <= o.conv_tol) break;
    CHECK(r.iteration_changes[i] < 0.5 * r.iteration_changes[i - 1]);
  }
  // Q is quadratically small against |v|_{H1}
  CHECK(r.q_smallness_c < 10.0);
  CHECK(std::isfinite(r.Ubar_star));
}

TEST_CASE("perturbation sup norm stays (1+t)^{-1}-bounded") {
  WaveProfile man = manufactured_profile(0.3, 1.0, 64);
  SpectralBranch br = critical_branch(man, 16, 0.1 * M_PI, 21);
  InitialData v0;
  v0.cls = DataClass::GaussianEnvelope;
  v0.E0 = 0.005;
  v0.M = 2.0;
  ModulationOptions o = fast_options();
  o.T_final = 50.0;
  o.half_width = 128;
  ModulationResult r = modulation_pipeline(man, br, v0, o);
  CHECK(r.converged);
  double ref = 0.0;
  for (size_t k = 0; k < r.times.size(); ++k) {
    if (r.times[k] < 2.0) continue;
    double weighted = r.v[k].cwiseAbs().maxCoeff() * (1.0 + r.times[k]);
    if (ref == 0.0) ref = weighted;
    CHECK(weighted < 4.0 * ref);
  }
}

TEST_CASE("reconstruction error is second order in the amplitude") {
  WaveProfile man = manufactured_profile(0.3, 1.0, 64);
  SpectralBranch br = critical_branch(man, 16, 0.1 * M_PI, 21);
  ModulationOptions o = fast_options();
  o.T_final = 8.0;
  o.half_width = 32;
  auto recon_error = [&](double E0) {
    InitialData v0;
    v0.cls = DataClass::GaussianEnvelope;
    v0.E0 = E0;
    v0.M = 2.0;
    ModulationResult r = modulation_pipeline(man, br, v0, o);
    std::vector<RVec> u = simulate_perturbation(
        man, [&](double x) { return v0.sample(x); }, r.times, 0.001,
        o.m_per_unit, o.half_width, o.beta);
    double worst = 0.0;
    for (size_t k = 0; k < r.times.size(); ++k) {
      RVec rec(r.grid.size());
      for (int i = 0; i < r.grid.size(); ++i) {
        double xf = r.grid[i] - std::floor(r.grid[i]);
        rec[i] = r.v[k][i] - br.q0_at(xf) * r.psi[k][i];
      }
      worst = std::max(worst, (rec - u[k]).cwiseAbs().maxCoeff());
    }
    return worst;
  };
  double e1 = recon_error(0.02);
  double e2 = recon_error(0.01);
  CHECK(e1 / e2 > 2.8);  // O(E0^2): halving the amplitude quarters the error
  CHECK(e1 / e2 < 6.0);
}
