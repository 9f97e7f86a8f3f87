#pragma once

// Closed forms for the scalar constant-coefficient case: Floquet exponents,
// whole-line and periodic resolvent kernels, and the dichotomy projections.
// Test-side oracle, independent of the propagator-based implementation.

#include <complex>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

struct ScalarCase {
  double a = 0.0;   // profile speed (coefficient of d/dx)
  double c = 0.0;   // constant zeroth-order coefficient
  double xi = 0.0;
  Complex lambda{0.0, 0.0};

  Complex mu_minus() const {
    return 0.5 * (-(a + Complex(0, 2 * xi)) - root());
  }
  Complex mu_plus() const {
    return 0.5 * (-(a + Complex(0, 2 * xi)) + root());
  }
  Complex root() const {
    return std::sqrt(Complex(a * a, 0.0) + 4.0 * (lambda - c));
  }

  // whole-line kernel of (L_xi - lambda)^{-1}
  Complex whole(double x, double y) const {
    Complex mm = mu_minus(), mp = mu_plus();
    double d = x - y;
    return (d > 0 ? std::exp(mm * d) : std::exp(mp * d)) / (mm - mp);
  }

  // periodic-cell kernel
  Complex periodic(double x, double y) const {
    Complex mm = mu_minus(), mp = mu_plus();
    double d = x - y + (x > y ? 0.0 : 1.0);
    return std::exp(mm * d) / ((mm - mp) * (1.0 - std::exp(mm))) -
           std::exp(mp * d) / ((mm - mp) * (1.0 - std::exp(mp)));
  }

  Eigen::Matrix2cd pi_plus() const {
    Complex mm = mu_minus(), mp = mu_plus();
    Eigen::Matrix2cd P;
    P << -mp / (mm - mp), 1.0 / (mm - mp), -mm * mp / (mm - mp), mm / (mm - mp);
    return P;
  }
};

}  // namespace oracle
