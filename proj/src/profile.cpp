#include "floq/profile.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace floq {

namespace {

void check_grid(int grid_size) {
  if (grid_size < 16 || grid_size % 2 != 0) {
    throw std::invalid_argument("profile: grid must be even and >= 16");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

WaveProfile WaveProfile::constant(int n, double a, const Eigen::MatrixXd& c0,
                                  int grid_size) {
  if (n < 1) throw std::invalid_argument("profile: dimension must be positive");
  if (c0.rows() != n || c0.cols() != n) {
    throw std::invalid_argument("profile: coefficient matrix must be n x n");
  }
  check_grid(grid_size);
  WaveProfile p;
  p.n_ = n;
  p.a_ = a;
  p.nx_ = grid_size;
  p.source_ = ProfileSource::Analytic;
  p.coeff_.assign(grid_size, c0);
  p.finalize();
  return p;
}

WaveProfile WaveProfile::manufactured(const RVec& p_samples, double a) {
  const int nx = static_cast<int>(p_samples.size());
  check_grid(nx);
  if (p_samples.cwiseAbs().minCoeff() < 1e-8) {
    throw std::invalid_argument(
        "profile: manufactured p must satisfy min|p| >= 1e-8");
  }
  if (p_samples.minCoeff() <= 0.0) {
    throw std::invalid_argument("profile: manufactured p must be positive");
  }
  RVec dp = spectral_derivative(p_samples, 1);
  RVec ddp = spectral_derivative(p_samples, 2);
  WaveProfile prof;
  prof.n_ = 1;
  prof.a_ = a;
  prof.nx_ = nx;
  prof.source_ = ProfileSource::Manufactured;
  prof.coeff_.resize(nx);
  prof.derivative_.resize(nx);
  for (int i = 0; i < nx; ++i) {
    Eigen::MatrixXd c(1, 1);
    c(0, 0) = -(ddp[i] + a * dp[i]) / p_samples[i];
    prof.coeff_[i] = c;
    RVec d(1);
    d[0] = p_samples[i];
    prof.derivative_[i] = d;
  }
  prof.finalize();
  return prof;
}

WaveProfile WaveProfile::from_samples(int n, double a,
                                      std::vector<Eigen::MatrixXd> coeff_samples,
                                      std::vector<RVec> profile_samples,
                                      std::vector<RVec> derivative_samples) {
  const int nx = static_cast<int>(coeff_samples.size());
  check_grid(nx);
  if (n < 1) throw std::invalid_argument("profile: dimension must be positive");
  for (const auto& c : coeff_samples) {
    if (c.rows() != n || c.cols() != n) {
      throw std::invalid_argument("profile: coefficient blocks must be n x n");
    }
  }
  if (!profile_samples.empty() &&
      static_cast<int>(profile_samples.size()) != nx) {
    throw std::invalid_argument("profile: profile samples grid mismatch");
  }
  if (!derivative_samples.empty() &&
      static_cast<int>(derivative_samples.size()) != nx) {
    throw std::invalid_argument("profile: derivative samples grid mismatch");
  }
  WaveProfile p;
  p.n_ = n;
  p.a_ = a;
  p.nx_ = nx;
  p.source_ = ProfileSource::Analytic;
  p.coeff_ = std::move(coeff_samples);
  p.profile_ = std::move(profile_samples);
  p.derivative_ = std::move(derivative_samples);
  p.finalize();
  return p;
}

void WaveProfile::finalize() {
  coeff_hat_.resize(n_ * n_);
  coeff_interp_.resize(n_ * n_);
  constant_coeff_ = true;
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) {
      RVec samples(nx_);
      for (int i = 0; i < nx_; ++i) samples[i] = coeff_[i](r, c);
      if ((samples.array() - samples[0]).abs().maxCoeff() > 0.0) {
        constant_coeff_ = false;
      }
      coeff_hat_[r * n_ + c] = fourier_coefficients(samples);
      coeff_interp_[r * n_ + c] = TrigInterp(samples);
    }
  }
  if (!derivative_.empty()) {
    deriv_interp_.resize(n_);
    for (int c = 0; c < n_; ++c) {
      RVec samples(nx_);
      for (int i = 0; i < nx_; ++i) samples[i] = derivative_[i][c];
      deriv_interp_[c] = TrigInterp(samples);
    }
  }
  // When both profile and derivative samples are present, the derivative must
  // agree with spectral differentiation of the profile.
  if (!profile_.empty() && !derivative_.empty()) {
    for (int c = 0; c < n_; ++c) {
      RVec u(nx_), du(nx_);
      for (int i = 0; i < nx_; ++i) {
        u[i] = profile_[i][c];
        du[i] = derivative_[i][c];
      }
      RVec du_spec = spectral_derivative(u, 1);
      double scale = std::max(1.0, du.cwiseAbs().maxCoeff());
      if ((du - du_spec).cwiseAbs().maxCoeff() > 1e-6 * scale) {
        throw std::invalid_argument(
            "profile: derivative samples inconsistent with spectral "
            "differentiation of profile samples");
      }
    }
  }
}

Eigen::MatrixXd WaveProfile::coeff_at(double x) const {
  Eigen::MatrixXd out(n_, n_);
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) out(r, c) = coeff_interp_[r * n_ + c](x);
  }
  return out;
}

Eigen::MatrixXcd WaveProfile::coeff_fourier(int m) const {
  Eigen::MatrixXcd out(n_, n_);
  if (m < -nx_ / 2 || m > nx_ / 2) {
    out.setZero();
    return out;
  }
  int k = (m % nx_ + nx_) % nx_;
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) out(r, c) = coeff_hat_[r * n_ + c][k];
  }
  return out;
}

double WaveProfile::coeff_fourier_tail(int K) const {
  double tail = 0.0;
  for (int m = K + 1; m <= nx_ / 2; ++m) {
    tail = std::max(tail, coeff_fourier(m).cwiseAbs().maxCoeff());
    tail = std::max(tail, coeff_fourier(-m).cwiseAbs().maxCoeff());
  }
  return tail;
}

double WaveProfile::derivative_at(double x, int k) const {
  if (deriv_interp_.empty()) {
    throw std::logic_error("profile: no derivative samples available");
  }
  return deriv_interp_[k](x);
}

std::string WaveProfile::serialize() const {
  std::ostringstream out;
  out << "n=" << n_ << " a=" << format_double(a_) << " Nx=" << nx_ << "\n";
  for (int i = 0; i < nx_; ++i) {
    out << i;
    for (int r = 0; r < n_; ++r) {
      for (int c = 0; c < n_; ++c) out << " " << format_double(coeff_[i](r, c));
    }
    out << "\n";
  }
  return out.str();
}

void WaveProfile::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("profile: cannot open " + path);
  f << serialize();
}

WaveProfile WaveProfile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("profile: cannot open " + path);
  std::string header;
  if (!std::getline(f, header)) {
    throw std::runtime_error("profile: empty file " + path);
  }
  int n = 0, nx = 0;
  double a = 0.0;
  if (std::sscanf(header.c_str(), "n=%d a=%lf Nx=%d", &n, &a, &nx) != 3) {
    throw std::runtime_error("profile: malformed header in " + path);
  }
  if (n < 1) throw std::runtime_error("profile: dimension must be positive");
  if (nx < 16 || nx % 2 != 0) {
    throw std::runtime_error("profile: grid must be even and >= 16");
  }
  WaveProfile p;
  p.n_ = n;
  p.a_ = a;
  p.nx_ = nx;
  p.source_ = ProfileSource::ExternalFile;
  p.coeff_.resize(nx);
  for (int i = 0; i < nx; ++i) {
    std::string line;
    if (!std::getline(f, line)) {
      throw std::runtime_error("profile: truncated file " + path);
    }
    std::istringstream ls(line);
    int idx = -1;
    ls >> idx;
    if (idx != i) {
      throw std::runtime_error("profile: non-uniform or misordered grid");
    }
    Eigen::MatrixXd c(n, n);
    for (int r = 0; r < n; ++r) {
      for (int cc = 0; cc < n; ++cc) {
        if (!(ls >> c(r, cc))) {
          throw std::runtime_error(
              "profile: row count does not match n^2 entries per point");
        }
      }
    }
    double extra;
    if (ls >> extra) {
      throw std::runtime_error(
          "profile: row count does not match n^2 entries per point");
    }
    p.coeff_[i] = c;
  }
  p.finalize();
  return p;
}

WaveProfile heat_profile(int grid_size) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 1);
  return WaveProfile::constant(1, 0.0, z, grid_size);
}

WaveProfile advection_diffusion_profile(double wave_speed, int grid_size) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 1);
  return WaveProfile::constant(1, -wave_speed, z, grid_size);
}

WaveProfile manufactured_profile(double amplitude, double a, int grid_size) {
  RVec p(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    p[i] = 1.0 + amplitude * std::sin(2.0 * M_PI * i / grid_size);
  }
  return WaveProfile::manufactured(p, a);
}

}  // namespace floq
