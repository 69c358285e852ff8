#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zo/zo_signum.hpp"

namespace zo {

// Outer-loop schedule: beta^i = beta0/(i+1)^2, s1^{i,0} = s1_00/(i+1)^{3/2},
// s2^{i,0} = s2_00/(i+1). Convex mode swaps the inner step sizes for
// s1^{i,k} = 2 rho/(k+1) and s2^{i,k} = 1/(k+1)^{2/3}.
struct SubproblemSchedule {
  double beta0 = 0.1;
  double s1_00 = 0.1;
  double s2_00 = 0.5;
  double epsilon = 1e-3;
  double alpha1 = 0.5;
  double alpha2 = 0.25;

  enum class Mode { standard, convex };
  Mode mode = Mode::standard;
  double rho = 0.0;  // iterate-diameter bound, convex mode only

  double beta(int i) const {
    const double d = static_cast<double>(i) + 1.0;
    return beta0 / (d * d);
  }
  double s1_0(int i) const { return s1_00 / std::pow(static_cast<double>(i) + 1.0, 1.5); }
  double s2_0(int i) const { return s2_00 / (static_cast<double>(i) + 1.0); }

  StepSchedule inner(int i) const;
  void validate() const;
};

// All points the search phase has evaluated, keyed by the exact bit pattern
// of x. The best point is the one with the smallest mean observed value,
// ties resolved toward the earliest insertion.
class EvalCache {
 public:
  struct Entry {
    std::vector<double> x;
    std::vector<double> values;
    std::uint64_t order = 0;
    double mean() const;
  };

  void insert(std::span<const double> x, double value);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Entry& best() const;  // throws std::runtime_error when empty

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Entry> entries_;
};

// Best cached point (Algorithm restart rule). Errors on an empty cache.
std::vector<double> search_restart(const EvalCache& cache);

struct SubproblemSummary {
  int i = 0;
  bool search_phase = false;
  double beta = 0.0;
  double threshold = 0.0;
  std::int64_t iterations = 0;
  std::uint64_t evals = 0;
  StopReason reason = StopReason::threshold_met;
  double final_m_norm = 0.0;
};

enum class SsoStop { epsilon_reached, budget_exhausted, oracle_error };

const char* to_string(SsoStop r);

struct SsoParams {
  std::vector<double> x0;
  SubproblemSchedule schedule;
  SmoothingConfig smoothing;  // beta is overridden per subproblem
  std::int64_t min_iters = 5;         // M
  std::uint64_t search_budget = 0;    // N; 0 disables the search phase
  std::uint64_t max_evals = 1000000;  // global evaluation budget
  const BoxBounds* bounds = nullptr;
  std::int64_t trace_stride = 1;
  StepObserver observer;
};

struct SsoResult {
  std::vector<double> x;
  std::vector<double> m;
  int subproblems_run = 0;
  std::vector<SubproblemSummary> summaries;
  RunTrace trace;
  SsoStop reason = SsoStop::epsilon_reached;
  std::string error;
  std::uint64_t evals_used = 0;
  std::uint64_t init_evals = 0;  // the m^{0,0} estimate; runs before any subproblem
  double best_f = std::numeric_limits<double>::infinity();
  double momentum_scale = 0.0;  // L = ||m^{0,0}||, fixes the subproblem thresholds
};

// The outer driver: one initialization estimate, an optional search phase
// restarting from the cache's best point, then local subproblems with
// thresholds L*beta^i/(4*beta^0) until beta^i <= epsilon or the budget runs
// out. m and x warm-start from one subproblem to the next.
SsoResult run_sso(const Oracle& oracle, const SsoParams& params, RngSequencer& seq);

}  // namespace zo
