#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zo/config.hpp"
#include "zo/sso.hpp"

namespace zo {

// x <- x - step * g, box-projected; the baseline's update rule.
void apply_gradient_step(std::span<double> x, std::span<const double> g, double step,
                         const BoxBounds* bounds);

struct AlgorithmOutcome {
  RunTrace trace;
  std::vector<double> x_final;
  std::uint64_t evals_used = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::string exit_reason;  // epsilon-reached | threshold-met | budget-exhausted | oracle-error
  std::string error_detail;
  std::vector<SubproblemSummary> summaries;  // sso only
  double momentum_scale = 0.0;               // sso only (L)
  // Post-run objective estimate at x_final: mean of 30 fresh draws, not
  // charged against the optimization budget.
  double final_f_mean = std::numeric_limits<double>::quiet_NaN();
};

std::unique_ptr<Oracle> build_oracle(const RunConfig& cfg);
std::optional<BoxBounds> build_bounds(const RunConfig& cfg);
std::vector<double> default_start_point(const RunConfig& cfg, const BoxBounds* bounds);

// Runs the configured algorithm with the configured seed; fills timing into
// the trace only when cfg.timing is set.
AlgorithmOutcome execute_run(const RunConfig& cfg);

std::string render_summary(const RunConfig& cfg, const AlgorithmOutcome& out);

struct MultiSeedRow {
  std::uint64_t cum_evals = 0;
  double mean = 0.0;
  double stdev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Figure-style multi-seed aggregation: runs seeds base..base+count-1 (each
// fully isolated, possibly concurrent) and tabulates best-observed F on the
// shared cumulative-eval grid.
std::vector<MultiSeedRow> run_multi_seed(const RunConfig& cfg, int seed_count,
                                         std::vector<AlgorithmOutcome>* outcomes = nullptr);

std::string render_multi_seed_csv(const std::vector<MultiSeedRow>& rows);

}  // namespace zo
