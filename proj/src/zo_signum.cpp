#include "zo/zo_signum.hpp"

#include <algorithm>
#include <cmath>

namespace zo {

void StepSchedule::validate() const {
  if (!s1_override) {
    if (!(s1_0 > 0.0 && s1_0 < 1.0)) {
      throw std::invalid_argument("step schedule: s1_0 must lie in (0,1)");
    }
  }
  if (!s2_override) {
    if (!(s2_0 > 0.0 && s2_0 < 1.0)) {
      throw std::invalid_argument("step schedule: s2_0 must lie in (0,1)");
    }
  }
  if (!s1_override || !s2_override) {
    if (!(alpha2 > 0.0 && alpha2 < alpha1 && alpha1 < 1.0)) {
      throw std::invalid_argument("step schedule: need 0 < alpha2 < alpha1 < 1");
    }
  }
  // Overrides must stay in (0,1] and decrease; spot-check the head of the
  // sequence, the closed forms guarantee the tail.
  for (std::int64_t k = 0; k < 8; ++k) {
    const double a = s1(k), b = s2(k);
    if (!(a > 0.0 && a <= 1.0) || !(b > 0.0 && b <= 1.0)) {
      throw std::invalid_argument("step schedule: step sizes must lie in (0,1]");
    }
    if (s1(k + 1) >= a || s2(k + 1) >= b) {
      throw std::invalid_argument("step schedule: step sizes must decrease in k");
    }
  }
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::threshold_met: return "threshold-met";
    case StopReason::budget_exhausted: return "budget-exhausted";
  }
  return "unknown";
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += std::abs(c);
  return s;
}

void apply_momentum_update(std::span<double> m, std::span<const double> g, double s2) {
  if (m.size() != g.size()) throw std::invalid_argument("momentum update: size mismatch");
  for (std::size_t j = 0; j < m.size(); ++j) {
    m[j] = s2 * g[j] + (1.0 - s2) * m[j];
  }
}

void apply_sign_step(std::span<double> x, std::span<const double> m, double s1,
                     const BoxBounds* bounds) {
  if (x.size() != m.size()) throw std::invalid_argument("sign step: size mismatch");
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] -= s1 * sign0(m[j]);
  }
  if (bounds) project_box_in_place(x, *bounds);
}

GradientEstimate zos_step(MomentumState& state, const Oracle& oracle, const SmoothingConfig& cfg,
                          double s1_k, double s2_k, const BoxBounds* bounds, RngSequencer& seq,
                          std::vector<EvalRecord>* records) {
  GradientEstimate est = gradient_estimate(oracle, state.x, cfg, seq, records);
  apply_momentum_update(state.m, est.g, s2_k);
  apply_sign_step(state.x, state.m, s1_k, bounds);
  state.k += 1;
  return est;
}

ZosResult run_zos(const Oracle& oracle, const ZosParams& params, RngSequencer& seq) {
  params.smoothing.validate();
  params.schedule.validate();
  if (params.x0.size() != static_cast<std::size_t>(oracle.dimension()) ||
      params.m0.size() != params.x0.size()) {
    throw std::invalid_argument("run_zos: x0/m0 dimension mismatch");
  }
  if (params.threshold < 0.0 || std::isnan(params.threshold)) {
    throw std::invalid_argument("run_zos: threshold must be >= 0");
  }
  if (params.min_iters < 0) throw std::invalid_argument("run_zos: min_iters must be >= 0");
  if (params.bounds) params.bounds->validate();

  ZosResult res;
  res.state.x = params.x0;
  res.state.m = params.m0;
  res.state.k = 0;
  res.best_f = params.best_f_in;

  const std::uint64_t step_cost = params.smoothing.evals_per_estimate();
  std::vector<double> x_before(res.state.x.size());
  bool last_recorded = false;
  const auto emit = [&](const TraceRecord& rec) {
    res.trace.push_back(rec);
    if (params.trace_sink) params.trace_sink->push_back(rec);
  };

  for (;;) {
    const double m_norm = l2_norm(res.state.m);
    // Loop guard: continue while ||m|| > tau or k <= M.
    if (!(m_norm > params.threshold || res.state.k <= params.min_iters)) {
      res.reason = StopReason::threshold_met;
      break;
    }
    if (res.state.k >= params.max_iters) {
      res.reason = StopReason::budget_exhausted;
      res.reason_detail = "max-iters";
      break;
    }
    if (res.evals_used + step_cost > params.max_evals) {
      res.reason = StopReason::budget_exhausted;
      res.reason_detail = "max-evals";
      break;
    }

    const std::int64_t k = res.state.k;
    const double s1_k = params.schedule.s1(k);
    const double s2_k = params.schedule.s2(k);
    std::copy(res.state.x.begin(), res.state.x.end(), x_before.begin());
    const GradientEstimate est = zos_step(res.state, oracle, params.smoothing, s1_k, s2_k,
                                          params.bounds, seq, params.recorder);
    res.evals_used += est.evals_used;
    res.best_f = std::min(res.best_f, est.min_observed);
    res.iterations += 1;

    if (params.observer) {
      StepView view;
      view.k = k;
      view.x_before = x_before;
      view.x_after = res.state.x;
      view.m_after = res.state.m;
      view.s1 = s1_k;
      view.s2 = s2_k;
      params.observer(view);
    }

    last_recorded = (res.iterations % std::max<std::int64_t>(params.trace_stride, 1) == 0);
    if (last_recorded) {
      TraceRecord rec;
      rec.k = res.iterations;
      rec.i = params.subproblem;
      rec.cum_evals = params.cum_evals_base + res.evals_used;
      rec.beta = params.smoothing.beta;
      rec.m_norm = l2_norm(res.state.m);
      rec.s1 = s1_k;
      rec.s2 = s2_k;
      rec.best_f = res.best_f;
      emit(rec);
    }
  }

  if (!last_recorded && res.iterations > 0) {
    // With thinning, always keep the final iterate's row.
    TraceRecord rec;
    rec.k = res.iterations;
    rec.i = params.subproblem;
    rec.cum_evals = params.cum_evals_base + res.evals_used;
    rec.beta = params.smoothing.beta;
    rec.m_norm = l2_norm(res.state.m);
    rec.s1 = params.schedule.s1(res.state.k - 1);
    rec.s2 = params.schedule.s2(res.state.k - 1);
    rec.best_f = res.best_f;
    emit(rec);
  }

  res.final_m_norm = l2_norm(res.state.m);
  return res;
}

}  // namespace zo
