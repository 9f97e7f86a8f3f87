#pragma once

// Small least-squares helpers used by the branch extraction, envelope fits,
// and decay-rate reporting.

#include <vector>

#include <Eigen/Dense>

#include "floq/fourier.hpp"

namespace floq {

// Coefficients of the least-squares fit y ~ sum_j coeff[j] * basis[j] (column
// basis matrix), via QR.
Eigen::VectorXcd lls_fit(const Eigen::MatrixXcd& basis, const CVec& y);
Eigen::VectorXd lls_fit(const Eigen::MatrixXd& basis, const RVec& y);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_halfwidth = 0.0;  // ~95% confidence half-width
  double scatter = 0.0;          // RMS residual
};

// Straight-line fit y = intercept + slope * x.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// log-log slope of y(t): fit of log(y) against log(t).
SlopeFit fit_loglog_slope(const std::vector<double>& t,
                          const std::vector<double>& y);

}  // namespace floq
