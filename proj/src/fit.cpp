#include "floq/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

Eigen::VectorXcd lls_fit(const Eigen::MatrixXcd& basis, const CVec& y) {
  return basis.colPivHouseholderQr().solve(y);
}

Eigen::VectorXd lls_fit(const Eigen::MatrixXd& basis, const RVec& y) {
  return basis.colPivHouseholderQr().solve(y);
}

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int m = static_cast<int>(x.size());
  if (m < 2 || y.size() != x.size()) {
    throw std::invalid_argument("fit_line: need >= 2 matching samples");
  }
  Eigen::MatrixXd B(m, 2);
  RVec v(m);
  for (int i = 0; i < m; ++i) {
    B(i, 0) = 1.0;
    B(i, 1) = x[i];
    v[i] = y[i];
  }
  Eigen::VectorXd c = lls_fit(B, v);
  SlopeFit fit;
  fit.intercept = c[0];
  fit.slope = c[1];
  RVec r = v - B * c;
  double dof = std::max(1, m - 2);
  double s2 = r.squaredNorm() / dof;
  fit.scatter = std::sqrt(r.squaredNorm() / m);
  double xbar = 0.0;
  for (double xi : x) xbar += xi;
  xbar /= m;
  double sxx = 0.0;
  for (double xi : x) sxx += (xi - xbar) * (xi - xbar);
  fit.slope_halfwidth = (sxx > 0.0) ? 2.0 * std::sqrt(s2 / sxx) : 0.0;
  return fit;
}

SlopeFit fit_loglog_slope(const std::vector<double>& t,
                          const std::vector<double>& y) {
  std::vector<double> lt, ly;
  lt.reserve(t.size());
  ly.reserve(y.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= 0.0 || y[i] <= 0.0) continue;
    lt.push_back(std::log(t[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lt, ly);
}

}  // namespace floq
