#pragma once

// Whole-line and periodic resolvent kernels of the Bloch operators, built
// from solution operators and exponential-dichotomy projections:
//   (G, G')(x,y) = F_xi^{y->x} M_xi^+(y) (0,I)^T   for x > y,
//                 -F_xi^{y->x} M_xi^-(y) (0,I)^T   for x <= y,
// with M^+ = (I - F^{y->y+1})^{-1}, M^- = -M^+ F^{y->y+1}. The assembly
// expands M^+/- in the monodromy eigenbasis and integrates every eigenvector
// in its decaying direction, so no ill-conditioned inverse of I - F is ever
// formed; for |lambda| above the rescale threshold all work happens in the
// rescaled variables xbar = |lambda|^{1/2} x.

#include <map>
#include <vector>

#include "floq/floquet.hpp"

namespace floq {

struct DichotomyProjections {
  double base_y = 0.0;
  CMat Pi_plus;   // projection onto solutions decaying as x -> +infinity
  CMat Pi_minus;  // complementary projection
  CVec stable_multipliers;    // |m| < 1
  CVec unstable_multipliers;  // |m| > 1
  CMat stable_basis, unstable_basis;  // work-coordinate eigenvectors
};

struct KernelField {
  enum class Kind { WholeLine, Periodic };
  Kind kind = Kind::Periodic;
  double xi = 0.0;
  Complex lambda{0.0, 0.0};
  int n = 1;
  std::vector<double> xs, ys;
  std::vector<CMat> stack;  // (2n x n) stacked (G, G') per (x index, y index)

  const CMat& stack_at(int i, int j) const { return stack[i * ys.size() + j]; }
  CMat G(int i, int j) const { return stack_at(i, j).topRows(n); }
  CMat Gp(int i, int j) const { return stack_at(i, j).bottomRows(n); }
};

// Kernel evaluation engine for one (xi, lambda). Caches monodromy
// eigen-splittings per base point.
class KernelEngine {
 public:
  KernelEngine(const FloquetSystem& sys, const SolveOptions& opts = {});

  // Stacked periodic kernel columns at (x, y), x - y in [-1, 1].
  CMat periodic_stack(double x, double y);
  // Stacked whole-line kernel columns at (x, y), any offset.
  CMat whole_line_stack(double x, double y);

  // Batch evaluation over a sorted list of offsets d = x - y from one base y.
  std::vector<CMat> periodic_stacks(double y, const std::vector<double>& ds);
  std::vector<CMat> whole_line_stacks(double y, const std::vector<double>& ds);

  DichotomyProjections projections(double base_y);

  double rescale() const { return rescaled_ ? scale_ : 1.0; }
  bool is_rescaled() const { return rescaled_; }

 private:
  struct Split {
    CVec stable_mult, unstable_mult;  // unstable as reciprocal r = 1/m
    CMat W;     // [stable basis | unstable basis], work coordinates
    CMat Winv;
  };
  const Split& split_at(double base_x);  // base in physical coordinates
  void fill_work_coefficient(double w, CMat& out) const;
  std::vector<CMat> stacks(double y, const std::vector<double>& ds,
                           bool periodic);

  FloquetSystem sys_;
  SolveOptions opts_;
  bool rescaled_ = false;
  double scale_ = 1.0;       // |lambda|^{1/2} when rescaled
  double checkpoint_ = 0.0;  // drift-control spacing in work coords (0 = off)
  std::map<long long, Split> split_cache_;
};

KernelField whole_line_kernel(const FloquetSystem& sys,
                              const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const SolveOptions& opts = {});
KernelField periodic_kernel(const FloquetSystem& sys,
                            const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const SolveOptions& opts = {});
DichotomyProjections dichotomy_projections(const FloquetSystem& sys,
                                           double base_y,
                                           const SolveOptions& opts = {});

struct ImagesCheck {
  double max_deviation = 0.0;         // at the requested J
  std::vector<double> deviation_by_j; // deviation of partial sums, j = 0..J
  double decay_rate = 0.0;            // fitted c of the whole-line kernel
  double tail_bound = 0.0;            // K e^{-c(J+1)} / (1 - e^{-c})
};

// Max deviation over the grid between the periodic kernel and the truncated
// image sum sum_{|j|<=J} Gw(x, y+j) of the whole-line kernel.
ImagesCheck method_of_images_check(const FloquetSystem& sys, int J,
                                   const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   const SolveOptions& opts = {});

struct HighFrequencyFit {
  double C = 0.0;              // fitted prefactor
  double rate = 0.0;           // fitted beta^{-1/2}
  double scatter = 0.0;        // RMS residual of the fit, log units
  std::vector<double> sup_scaled;  // per lambda: sup |G| * |lambda|^{1/2}
};

// Fit of log|G_{xi,lambda}(x,y)| + (1/2) log|lambda| against
// -|lambda|^{1/2} min_j |x - y - j| across the lambda list. Offsets are
// chosen near the diagonal, within ~25 rescaled units.
HighFrequencyFit high_frequency_modulus_check(
    const WaveProfile& profile, double xi, const std::vector<Complex>& lambdas,
    int n_offsets = 12, const SolveOptions& opts = {});

}  // namespace floq
