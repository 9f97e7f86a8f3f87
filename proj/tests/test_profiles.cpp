#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "floq/profile.hpp"

using namespace floq;

TEST_CASE("constant profiles hold the coefficient everywhere") {
  Eigen::MatrixXd c0(1, 1);
  c0 << 0.0;
  WaveProfile p = WaveProfile::constant(1, 1.0, c0, 64);
  CHECK(p.speed() == 1.0);
  CHECK(p.dimension() == 1);
  for (int i = 0; i < 64; ++i) CHECK(p.coeff(i)(0, 0) == 0.0);
  CHECK(p.coeff_at(0.123)(0, 0) == doctest::Approx(0.0).epsilon(1e-14));

  WaveProfile heat = heat_profile(16);
  CHECK(heat.speed() == 0.0);

  Eigen::MatrixXd d(2, 2);
  d << -1.0, 0.0, 0.0, -2.0;
  WaveProfile sys = WaveProfile::constant(2, 1.0, d, 32);
  CHECK(sys.coeff(7)(1, 1) == -2.0);
  CHECK(sys.is_constant_coeff());
}

TEST_CASE("constant profile rejects bad grids") {
  Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS(WaveProfile::constant(1, 0.0, c0, 63));
  CHECK_THROWS(WaveProfile::constant(1, 0.0, c0, 8));
  CHECK_THROWS(WaveProfile::constant(0, 0.0, c0, 64));
}

TEST_CASE("manufactured profile has an exact discrete zero mode") {
  // p == 1: constants are annihilated by d^2 + a d, so c == 0
  RVec ones = RVec::Ones(64);
  WaveProfile trivial = WaveProfile::manufactured(ones, 1.0);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(trivial.coeff(i)(0, 0)) < 1e-14);
  }

  for (double a : {1.0, 0.0}) {
    int nx = a == 0.0 ? 32 : 64;
    RVec p(nx);
    for (int i = 0; i < nx; ++i) {
      p[i] = 1.0 + 0.3 * std::sin(2.0 * M_PI * i / nx);
    }
    WaveProfile prof = WaveProfile::manufactured(p, a);
    // oracle: direct substitution of spectral derivatives on the grid
    RVec dp = spectral_derivative(p, 1);
    RVec ddp = spectral_derivative(p, 2);
    double residual = 0.0;
    for (int i = 0; i < nx; ++i) {
      residual = std::max(residual, std::abs(ddp[i] + a * dp[i] +
                                             prof.coeff(i)(0, 0) * p[i]));
    }
    CHECK(residual < 1e-10);
    CHECK(prof.has_derivative_samples());
    CHECK(prof.derivative_sample(3)[0] == p[3]);
  }
}

TEST_CASE("manufactured profile rejects near-zero p") {
  RVec p(32);
  for (int i = 0; i < 32; ++i) {
    p[i] = 1e-9 + 0.5 * (1 + std::cos(2.0 * M_PI * i / 32));
  }
  CHECK_THROWS(WaveProfile::manufactured(p, 0.0));
}

TEST_CASE("save/load round trip is canonical") {
  WaveProfile orig = manufactured_profile(0.3, 1.0, 64);
  std::string path = "test_profile_roundtrip.txt";
  orig.save(path);
  WaveProfile loaded = WaveProfile::load(path);
  CHECK(loaded.dimension() == orig.dimension());
  CHECK(loaded.speed() == orig.speed());
  CHECK(loaded.grid_size() == orig.grid_size());
  for (int i = 0; i < 64; ++i) {
    CHECK(loaded.coeff(i)(0, 0) == orig.coeff(i)(0, 0));
  }
  // canonical re-serialization is bit-identical
  std::string again = "test_profile_roundtrip2.txt";
  loaded.save(again);
  std::ifstream f1(path), f2(again);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == loaded.serialize());
  CHECK(s1 == s2);
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("load rejects malformed files") {
  {
    std::ofstream f("test_profile_bad1.txt");
    f << "n=1 a=0 Nx=63\n";
    for (int i = 0; i < 63; ++i) f << i << " 0\n";
  }
  CHECK_THROWS_WITH_AS(WaveProfile::load("test_profile_bad1.txt"),
                       doctest::Contains("even"), std::runtime_error);
  {
    std::ofstream f("test_profile_bad2.txt");
    f << "n=2 a=0 Nx=16\n";
    for (int i = 0; i < 16; ++i) f << i << " 0 0 0\n";  // 3 != n^2 entries
  }
  CHECK_THROWS(WaveProfile::load("test_profile_bad2.txt"));
  std::remove("test_profile_bad1.txt");
  std::remove("test_profile_bad2.txt");
}

TEST_CASE("spectral differentiation is exact on resolved Fourier modes") {
  const int n = 64;
  for (int k : {1, 5, 17, 31}) {
    RVec u(n), du_ref(n);
    for (int i = 0; i < n; ++i) {
      double x = static_cast<double>(i) / n;
      u[i] = std::cos(2.0 * M_PI * k * x);
      du_ref[i] = -2.0 * M_PI * k * std::sin(2.0 * M_PI * k * x);
    }
    RVec du = spectral_derivative(u, 1);
    double scale = 2.0 * M_PI * k;
    CHECK((du - du_ref).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("derivative samples must match spectral differentiation") {
  const int nx = 32;
  std::vector<Eigen::MatrixXd> coeff(nx, Eigen::MatrixXd::Zero(1, 1));
  std::vector<RVec> prof(nx), dprof(nx), bad(nx);
  for (int i = 0; i < nx; ++i) {
    double x = static_cast<double>(i) / nx;
    prof[i] = RVec::Constant(1, std::sin(2.0 * M_PI * x));
    dprof[i] = RVec::Constant(1, 2.0 * M_PI * std::cos(2.0 * M_PI * x));
    bad[i] = RVec::Constant(1, 2.0 * M_PI * std::cos(2.0 * M_PI * x) + 0.01);
  }
  CHECK_NOTHROW(WaveProfile::from_samples(1, 0.0, coeff, prof, dprof));
  CHECK_THROWS(WaveProfile::from_samples(1, 0.0, coeff, prof, bad));
}

TEST_CASE("trig interpolation reproduces grid samples and wraps") {
  WaveProfile man = manufactured_profile(0.3, 1.0, 64);
  for (int i = 0; i < 64; ++i) {
    double x = i / 64.0;
    CHECK(man.coeff_at(x)(0, 0) ==
          doctest::Approx(man.coeff(i)(0, 0)).epsilon(1e-12));
  }
  CHECK(man.coeff_at(0.25)(0, 0) ==
        doctest::Approx(man.coeff_at(1.25)(0, 0)).epsilon(1e-12));
}
