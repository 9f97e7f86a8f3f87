#pragma once

// 1-periodic coefficient data for the linearized operator
//   L = d^2/dx^2 + a d/dx + df(ubar(x)),
// sampled on a uniform grid of [0,1). Profiles are immutable after
// construction and safe to share across threads.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "floq/fourier.hpp"

namespace floq {

enum class ProfileSource { Analytic, Manufactured, ExternalFile };

class WaveProfile {
 public:
  // Constant coefficient matrix c0 at every grid point.
  static WaveProfile constant(int n, double a, const Eigen::MatrixXd& c0,
                              int grid_size);

  // Scalar profile with coefficient c(x) = -(p'' + a p')/p built so that the
  // strictly positive 1-periodic function p is an exact discrete zero mode:
  // p'' + a p' + c p = 0 at every grid point (derivatives spectral).
  // p is stored in derivative_samples, standing in for the zero mode q(.,0).
  static WaveProfile manufactured(const RVec& p, double a);

  // Full ingestion path: coefficient samples plus optional wave profile and
  // derivative samples (validated against spectral differentiation).
  static WaveProfile from_samples(int n, double a,
                                  std::vector<Eigen::MatrixXd> coeff_samples,
                                  std::vector<RVec> profile_samples = {},
                                  std::vector<RVec> derivative_samples = {});

  static WaveProfile load(const std::string& path);
  void save(const std::string& path) const;
  std::string serialize() const;

  int dimension() const { return n_; }
  double speed() const { return a_; }
  int grid_size() const { return nx_; }
  double grid_point(int i) const { return static_cast<double>(i) / nx_; }
  ProfileSource source() const { return source_; }

  // df(ubar) at grid node i, wrapping i periodically.
  const Eigen::MatrixXd& coeff(int i) const {
    return coeff_[((i % nx_) + nx_) % nx_];
  }
  // Trigonometric interpolation of df(ubar) at arbitrary x.
  Eigen::MatrixXd coeff_at(double x) const;
  double coeff_entry_at(int r, int c, double x) const {
    return coeff_interp_[r * n_ + c](x);
  }
  // Fourier coefficient block \hat C_m of df(ubar), |m| <= Nx/2.
  Eigen::MatrixXcd coeff_fourier(int m) const;
  // Largest entrywise |\hat C_m| over K < |m| <= Nx/2 (Galerkin tail gauge).
  double coeff_fourier_tail(int K) const;

  bool has_profile_samples() const { return !profile_.empty(); }
  bool has_derivative_samples() const { return !derivative_.empty(); }
  const RVec& profile_sample(int i) const { return profile_[i]; }
  const RVec& derivative_sample(int i) const { return derivative_[i]; }
  // Derivative of the wave profile as a function of x (component k).
  double derivative_at(double x, int k = 0) const;

  bool is_constant_coeff() const { return constant_coeff_; }

 private:
  WaveProfile() = default;
  void finalize();  // builds Fourier caches, validates invariants

  int n_ = 0;
  double a_ = 0.0;
  int nx_ = 0;
  ProfileSource source_ = ProfileSource::Analytic;
  std::vector<Eigen::MatrixXd> coeff_;   // df(ubar) at each grid point
  std::vector<RVec> profile_;            // optional ubar samples
  std::vector<RVec> derivative_;         // optional ubar' samples
  std::vector<CVec> coeff_hat_;          // per (row,col): Fourier coefficients
  std::vector<TrigInterp> coeff_interp_; // per (row,col)
  std::vector<TrigInterp> deriv_interp_;
  bool constant_coeff_ = false;
};

// Named fixtures used throughout the test and report tooling.
// The advection-diffusion fixture is u_t + s u_x = u_xx written in the
// operator convention above, i.e. profile speed a = -s.
WaveProfile heat_profile(int grid_size = 64);
WaveProfile advection_diffusion_profile(double wave_speed = 1.0,
                                        int grid_size = 64);
WaveProfile manufactured_profile(double amplitude = 0.3, double a = 1.0,
                                 int grid_size = 64);

}  // namespace floq
