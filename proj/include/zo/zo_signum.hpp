#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zo/oracle.hpp"
#include "zo/smoothing.hpp"
#include "zo/trace.hpp"

namespace zo {

// Decaying step-size pair s1^k = s1_0/(k+1)^alpha1, s2^k = s2_0/(k+1)^alpha2,
// with optional per-k overrides for schedules that do not fit the power form.
struct StepSchedule {
  double s1_0 = 0.1;
  double s2_0 = 0.5;
  double alpha1 = 0.75;
  double alpha2 = 0.5;
  std::function<double(std::int64_t)> s1_override;
  std::function<double(std::int64_t)> s2_override;

  double s1(std::int64_t k) const {
    return s1_override ? s1_override(k) : s1_0 / std::pow(static_cast<double>(k) + 1.0, alpha1);
  }
  double s2(std::int64_t k) const {
    return s2_override ? s2_override(k) : s2_0 / std::pow(static_cast<double>(k) + 1.0, alpha2);
  }
  void validate() const;
};

struct MomentumState {
  std::vector<double> x;
  std::vector<double> m;
  std::int64_t k = 0;
};

enum class StopReason { threshold_met, budget_exhausted };

const char* to_string(StopReason r);

// sign with sign(0) = 0, so exactly-converged coordinates do not move.
inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// m <- s2 * g + (1 - s2) * m
void apply_momentum_update(std::span<double> m, std::span<const double> g, double s2);

// x_j <- x_j - s1 * sign(m_j), then box projection when bounds are given.
void apply_sign_step(std::span<double> x, std::span<const double> m, double s1,
                     const BoxBounds* bounds);

// One full iteration: estimate, momentum update, sign step, k+1. Returns the
// estimate so callers can track eval counts and observed values.
GradientEstimate zos_step(MomentumState& state, const Oracle& oracle, const SmoothingConfig& cfg,
                          double s1_k, double s2_k, const BoxBounds* bounds, RngSequencer& seq,
                          std::vector<EvalRecord>* records = nullptr);

// Step snapshot handed to observers (diagnostics hooks). Spans alias the
// driver's buffers and are only valid during the call.
struct StepView {
  std::int64_t k = 0;  // index of the step just applied (0-based)
  std::span<const double> x_before;
  std::span<const double> x_after;
  std::span<const double> m_after;
  double s1 = 0.0;
  double s2 = 0.0;
};
using StepObserver = std::function<void(const StepView&)>;

struct ZosParams {
  std::vector<double> x0;
  std::vector<double> m0;  // callers warm-start or estimate this themselves
  double threshold = 1e-3; // tau; may be +inf (search phase)
  std::int64_t min_iters = 0;
  std::int64_t max_iters = std::numeric_limits<std::int64_t>::max();
  std::uint64_t max_evals = std::numeric_limits<std::uint64_t>::max();
  SmoothingConfig smoothing;
  StepSchedule schedule;
  const BoxBounds* bounds = nullptr;
  int subproblem = 0;                 // trace labeling only
  std::uint64_t cum_evals_base = 0;   // offset for trace records
  double best_f_in = std::numeric_limits<double>::infinity();
  std::int64_t trace_stride = 1;
  StepObserver observer;
  std::vector<EvalRecord>* recorder = nullptr;  // search-phase cache feed
  // Optional external sink receiving every trace row as it is produced, so
  // callers keep the partial trace when an evaluation error aborts the run.
  RunTrace* trace_sink = nullptr;
};

struct ZosResult {
  MomentumState state;
  std::int64_t iterations = 0;
  std::uint64_t evals_used = 0;
  StopReason reason = StopReason::threshold_met;
  std::string reason_detail;
  RunTrace trace;  // one record per iteration at stride 1
  double best_f = std::numeric_limits<double>::infinity();
  double final_m_norm = 0.0;
};

// Runs the sign-of-momentum loop:
//   while ||m^k||_2 > tau or k <= M, within the iteration/eval budget.
ZosResult run_zos(const Oracle& oracle, const ZosParams& params, RngSequencer& seq);

double l2_norm(std::span<const double> v);
double l1_norm(std::span<const double> v);

}  // namespace zo
