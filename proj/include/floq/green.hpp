#pragma once

// Time-domain Green function synthesis along three routes:
//  - inverse Bloch quadrature of the Galerkin semigroup e^{L_xi t},
//  - direct time evolution of mollified delta columns (independent oracle),
//  - inverse Laplace contour integration of the resolvent kernel,
// plus the heat-kernel leading term E of the large-time decomposition and
// the residual envelope fits.

#include <vector>

#include "floq/branch.hpp"
#include "floq/fit.hpp"
#include "floq/profile.hpp"
#include "floq/resolvent.hpp"

namespace floq {

enum class GreenRoute { BlochQuadrature, DirectEvolution, LaplaceContour };

struct GreenField {
  GreenRoute route = GreenRoute::BlochQuadrature;
  double t = 0.0;
  int n = 1;
  std::vector<double> xs;  // absolute positions, may span several periods
  std::vector<double> ys;
  std::vector<CMat> values;  // n x n block per (x index, y index)

  const CMat& value(int i, int j) const { return values[i * ys.size() + j]; }
  double max_imag() const;
};

// Matrix exponential e^{B t}: eigendecomposition when the eigenbasis is
// well conditioned (< 1e8), otherwise scaling-and-squaring.
CMat expm_times(const CMat& B, double t);

struct BlochSynthOptions {
  int K = 16;
  int n_xi = 256;
  double t_min = 0.05;
  bool verify_quadrature = false;  // compare against n_xi/2 and throw > 1e-5
};

GreenField green_bloch(const WaveProfile& profile, double t,
                       const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const BlochSynthOptions& opts = {});

struct DirectOptions {
  double dt = 0.01;
  double sigma = 0.02;       // mollification width of the delta columns
  int points_per_unit = 32;  // spatial resolution
  int half_width = 0;        // 0: choose from t and the requested offsets
};

GreenField green_direct(const WaveProfile& profile, double t,
                        const std::vector<double>& xs,
                        const std::vector<double>& ys,
                        const DirectOptions& opts = {});

struct LaplaceOptions {
  double theta1 = 0.25;  // sector vertex
  double theta2 = 0.5;   // sector slope
  double R = 4.0;        // radius of the bulge around the origin
  int arc_panels = 6;    // 8-point Gauss-Legendre panels
  int ray_panels = 7;    // geometric panels per ray
  int n_xi = 24;
  double cutoff = 30.0;  // ray truncation: e^{-cutoff} tail of e^{lambda t}
  SolveOptions solve{.tol = 1e-8, .auto_rescale = true,
                     .rescale_threshold = 100.0};
};

// Pointwise Green values by inverse Laplace transform of the Bloch-assembled
// resolvent; cross-check route for moderate t / large |x-y|/t.
std::vector<CMat> green_laplace_points(
    const WaveProfile& profile, double t,
    const std::vector<std::pair<double, double>>& points,
    const LaplaceOptions& opts = {});
CMat green_laplace_point(const WaveProfile& profile, double t, double x,
                         double y, const LaplaceOptions& opts = {});

// Heat-kernel leading term machinery derived from the critical branch:
//   E(x,t;y)  = kbar(x-y-at, bt) q(x,0) qtilde(y,0) chi(t),
//   e(x,t;y)  = kbar(x-y-at, bt) qtilde(y,0) chi(t)   (row vector),
// chi a smooth cutoff vanishing for t <= 1 and equal to 1 for t >= 2.
class LeadingKernel {
 public:
  explicit LeadingKernel(const SpectralBranch& branch, bool apply_chi = true);

  double drift() const { return a_; }
  double diffusion() const { return b_; }
  double chi(double t) const;
  double chi_prime(double t) const;
  double gaussian(double x, double t, double y) const;  // kbar(x-y-at, bt)

  Eigen::MatrixXd E(double x, double t, double y) const;  // n x n
  Eigen::RowVectorXd e(double x, double t, double y) const;
  Eigen::RowVectorXd e_x(double x, double t, double y) const;
  Eigen::RowVectorXd e_xx(double x, double t, double y) const;
  Eigen::RowVectorXd e_t(double x, double t, double y) const;

  double q(double x, int comp = 0) const { return branch_->q0_at(x, comp); }
  double qtilde(double y, int comp = 0) const {
    return branch_->qtilde0_at(y, comp);
  }

 private:
  const SpectralBranch* branch_;
  double a_, b_;
  int n_;
  bool apply_chi_;
};

struct LeadingTermSplit {
  double C_res = 0.0;
  double M_res = 0.0;
  double scatter = 0.0;      // RMS residual of the envelope fit, log units
  bool shape_violation = false;  // fitted M_res <= 0
  SlopeFit sup_slope;        // log-log slope of sup|G-E| against t
  std::vector<double> ts;
  std::vector<double> sup_residual;
};

// Envelope fit of the residual G - E over fields at t >= 2:
// log|R| ~ log C - log(1+t) - |x-y-at|^2 / (M_res t).
LeadingTermSplit leading_split(const std::vector<GreenField>& fields,
                               const SpectralBranch& branch);

}  // namespace floq
