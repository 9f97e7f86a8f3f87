#pragma once

// First-order eigenvalue systems U' = A_xi(x,lambda) U, their solution
// operators F_xi^{y->x}, monodromy matrices, and the periodic Evans function
//   D(lambda, xi) = det(Psi(lambda) - e^{i xi} I),
// Psi the monodromy of the xi = 0 system.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "floq/profile.hpp"

namespace floq {

using CMat = Eigen::MatrixXcd;

struct FloquetSystem {
  FloquetSystem(const WaveProfile& profile, double xi, Complex lambda);

  const WaveProfile* profile;
  double xi;
  Complex lambda;
  int n;  // profile dimension; the system is 2n x 2n

  // A_xi(x, lambda) = [[0, I], [lambda I + C_xi(x), A_xi]] with
  // A_xi = -(a + 2 i xi) I and C_xi(x) = -df(ubar(x)) - (i a xi - xi^2) I.
  CMat coefficient(double x) const;
  void fill_coefficient(double x, CMat& A) const;

  // Coefficient of the rescaled system of the high-frequency analysis,
  // evaluated at the rescaled coordinate xbar = |lambda|^{1/2} x.
  CMat coefficient_rescaled(double xbar) const;
  void fill_coefficient_rescaled(double xbar, CMat& A) const;

  double rescale_factor() const;  // |lambda|^{1/2}
};

struct PropagatorMatrix {
  double from_y = 0.0;
  double to_x = 0.0;
  CMat matrix;
  double error_estimate = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  bool auto_rescale = true;     // use rescaled variables for |lambda| > 100
  double rescale_threshold = 100.0;
};

// Adaptive Dormand-Prince 5(4) integration of M' = A(x) M over [y, x]
// (either direction) with initial value `init`. Returns the solution and an
// accumulated local-error estimate.
struct OdeResult {
  CMat value;
  double error_estimate = 0.0;
};
OdeResult integrate_matrix_ode(const std::function<CMat(double)>& A, double y,
                               double x, const CMat& init, double tol);
OdeResult integrate_matrix_ode_filled(
    const std::function<void(double, CMat&)>& fill, double y, double x,
    const CMat& init, double tol);

// Solution operator F_xi^{y->x} with identity data at y.
PropagatorMatrix solution_operator(const FloquetSystem& sys, double y, double x,
                                   const SolveOptions& opts = {});
inline PropagatorMatrix solution_operator(const FloquetSystem& sys, double y,
                                          double x, double tol) {
  SolveOptions o;
  o.tol = tol;
  return solution_operator(sys, y, x, o);
}

// Monodromy F_xi^{y -> y+1}.
PropagatorMatrix monodromy(const FloquetSystem& sys, double base_y,
                           const SolveOptions& opts = {});

// Floquet multipliers sorted by ascending modulus (ties by ascending arg).
CVec floquet_multipliers(const CMat& monodromy_matrix);

// Periodic Evans function D(lambda, xi) = det(Psi(lambda) - e^{i xi} I).
Complex evans(const WaveProfile& profile, Complex lambda, double xi,
              double tol = 1e-10);

// Winding number of D(., xi) along a closed polyline in lambda. Throws if
// |D| falls below 1e-10 on the refined contour samples.
int winding_number(const WaveProfile& profile, double xi,
                   const std::vector<Complex>& contour, double tol = 1e-10);

// Newton iteration for a root of D(., xi) starting from lambda0.
Complex evans_root(const WaveProfile& profile, double xi, Complex lambda0,
                   double tol = 1e-12, int max_iter = 40);

}  // namespace floq
