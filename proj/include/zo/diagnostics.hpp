#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zo/zo_signum.hpp"

namespace zo {

// Step-size admissibility inequalities for the decaying-momentum analysis.
// Both take s2_0 in (0,1) and are defined for k >= 1; k < 1 counts as a
// violation. cond1 gates the variance bound, cond2 the bias bound.
bool cond1_holds(std::int64_t k, double s2_0, double alpha2);
bool cond2_holds(std::int64_t k, double s2_0, double alpha1, double alpha2);

// Smallest k from which each inequality holds for every k' in [k, k_max]
// (for s2_0 < 1 the inequalities are vacuously true at k = 1 and can fail
// again afterwards, so first-hit scanning would be meaningless). A missing
// value means the condition still fails somewhere near k_max.
struct ConditionReport {
  double s2_0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::int64_t k_max = 0;
  std::optional<std::int64_t> k_cond1;
  std::optional<std::int64_t> k_cond2;
  std::optional<std::int64_t> joint_start() const;  // C = max of the two
};
ConditionReport solve_conditions(double s2_0, double alpha1, double alpha2, std::int64_t k_max);

// Constants that sit next to the empirical curves:
//   l1_smooth      = 2 sqrt(n) L0 / beta     (smoothness of f^beta)
//   variance_coeff = 9 s2_0 L0^2 (n+4)^2     (bound is coeff / k^alpha2)
//   bias_coeff     = 10 n l1_smooth s1_0/s2_0 (bound is coeff / k^(alpha1-alpha2))
struct TheoryConstants {
  double l1_smooth = 0.0;
  double variance_coeff = 0.0;
  double bias_coeff = 0.0;
};
TheoryConstants theory_constants(int n, double l0, double beta, double s1_0, double s2_0);

// Least-squares slope of log(value) against log(k) over the window
// [k_lo, k_hi]. half_width is the 2-sigma confidence half width.
struct RateFit {
  double slope = 0.0;
  double half_width = 0.0;
  int points_used = 0;
};
RateFit fit_rate(std::span<const double> ks, std::span<const double> values, double k_lo,
                 double k_hi);

// Companion recursion mbar^{k+1} = s2^k grad f^beta(x^k) + (1-s2^k) mbar^k,
// driven from a run_zos observer. Separates the momentum error into a
// variance part ||m - mbar||^2 and a bias part ||mbar - grad f^beta||_1.
class BiasTracker {
 public:
  using SmoothedGradFn = std::function<void(std::span<const double> x, std::span<double> grad)>;

  struct Record {
    std::int64_t k = 0;
    double var_gap_sq = 0.0;   // ||m^{k+1} - mbar^{k+1}||_2^2
    double bias_gap_l1 = 0.0;  // ||mbar^{k+1} - grad f^beta(x^k)||_1
  };

  BiasTracker(std::vector<double> mbar0, SmoothedGradFn grad_fbeta);

  void observe(const StepView& view);
  const std::vector<Record>& records() const { return records_; }
  StepObserver as_observer();

 private:
  std::vector<double> mbar_;
  std::vector<double> grad_;
  SmoothedGradFn grad_fn_;
  std::vector<Record> records_;
};

// One named verification check with a human-readable detail line.
struct VerificationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::vector<VerificationCheck> checks;
  bool all_pass() const;
  std::string to_text() const;
  std::string to_json() const;
};

// Fast empirical verification suite: condition solving for the shipped
// presets with re-substitution, theory-constant spot values, the momentum
// decay identity, projection properties, estimator sanity, and rate-fit
// exactness. Runs in seconds.
VerificationReport run_verification(std::uint64_t seed);

}  // namespace zo
