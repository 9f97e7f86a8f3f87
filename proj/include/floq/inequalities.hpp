#pragma once

// Numerical verification of the convolution inequalities behind the decay
// estimates: each lemma's left side is evaluated by adaptive quadrature on
// randomized parameter samples and bounded by a single fitted constant times
// the stated right side.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace floq {

// Adaptive Simpson quadrature of f over [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-9, int max_depth = 40);

struct LemmaCheck {
  std::string name;
  int samples = 0;
  double fitted_constant = 0.0;  // max over samples of LHS / RHS
  double cap = 0.0;              // pinned acceptance cap for the constant
  int violations = 0;            // samples with non-finite or capped ratio
  bool pass = false;
};

struct InequalityReport {
  std::vector<LemmaCheck> lemmas;
  bool all_pass = false;
};

// Runs all five lemma checks with >= n_samples randomized samples each
// (r in {1.5, 2.5, 3}, w in (0,1), randomized x, t, s).
InequalityReport inequality_suite(std::uint64_t seed = 12345,
                                  int n_samples = 220);

}  // namespace floq
