#include "zo/sso.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace zo {

StepSchedule SubproblemSchedule::inner(int i) const {
  StepSchedule s;
  if (mode == Mode::convex) {
    const double two_rho = 2.0 * rho;
    s.s1_override = [two_rho](std::int64_t k) {
      return two_rho / (static_cast<double>(k) + 1.0);
    };
    s.s2_override = [](std::int64_t k) {
      return 1.0 / std::pow(static_cast<double>(k) + 1.0, 2.0 / 3.0);
    };
    return s;
  }
  s.s1_0 = s1_0(i);
  s.s2_0 = s2_0(i);
  s.alpha1 = alpha1;
  s.alpha2 = alpha2;
  return s;
}

void SubproblemSchedule::validate() const {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) {
    throw std::invalid_argument("subproblem schedule: beta0 must be positive");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("subproblem schedule: epsilon must be positive");
  if (mode == Mode::convex) {
    if (!(rho > 0.0 && 2.0 * rho <= 1.0)) {
      throw std::invalid_argument("subproblem schedule: convex mode needs rho in (0, 0.5]");
    }
    return;
  }
  if (!(s1_00 > 0.0 && s1_00 < 1.0) || !(s2_00 > 0.0 && s2_00 < 1.0)) {
    throw std::invalid_argument("subproblem schedule: s1_00 and s2_00 must lie in (0,1)");
  }
  if (!(alpha2 > 0.0 && alpha2 < alpha1 && alpha1 < 1.0)) {
    throw std::invalid_argument("subproblem schedule: need 0 < alpha2 < alpha1 < 1");
  }
}

double EvalCache::Entry::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

void EvalCache::insert(std::span<const double> x, double value) {
  std::string key(reinterpret_cast<const char*>(x.data()), x.size() * sizeof(double));
  auto it = index_.find(key);
  if (it == index_.end()) {
    Entry e;
    e.x.assign(x.begin(), x.end());
    e.values.push_back(value);
    e.order = entries_.size();
    index_.emplace(std::move(key), entries_.size());
    entries_.push_back(std::move(e));
  } else {
    entries_[it->second].values.push_back(value);
  }
}

const EvalCache::Entry& EvalCache::best() const {
  if (entries_.empty()) throw std::runtime_error("eval cache: empty");
  std::size_t best = 0;
  double best_mean = entries_[0].mean();
  for (std::size_t j = 1; j < entries_.size(); ++j) {
    const double m = entries_[j].mean();
    if (m < best_mean) {  // strict: ties keep the earliest insertion
      best = j;
      best_mean = m;
    }
  }
  return entries_[best];
}

std::vector<double> search_restart(const EvalCache& cache) { return cache.best().x; }

const char* to_string(SsoStop r) {
  switch (r) {
    case SsoStop::epsilon_reached: return "epsilon-reached";
    case SsoStop::budget_exhausted: return "budget-exhausted";
    case SsoStop::oracle_error: return "oracle-error";
  }
  return "unknown";
}

SsoResult run_sso(const Oracle& oracle, const SsoParams& params, RngSequencer& seq) {
  params.schedule.validate();
  params.smoothing.validate();
  if (params.min_iters < 0) throw std::invalid_argument("run_sso: min_iters must be >= 0");
  if (params.x0.size() != static_cast<std::size_t>(oracle.dimension())) {
    throw std::invalid_argument("run_sso: x0 dimension mismatch");
  }
  if (params.bounds) {
    params.bounds->validate();
    if (!params.bounds->contains(params.x0)) {
      throw std::invalid_argument("run_sso: x0 violates the bounds");
    }
  }

  SsoResult res;
  res.x = params.x0;
  const bool search_enabled = params.search_budget > 0;
  EvalCache cache;
  std::vector<EvalRecord> records;
  std::vector<EvalRecord>* recorder = search_enabled ? &records : nullptr;
  const auto flush_records = [&]() {
    if (!recorder) return;
    for (EvalRecord& r : records) cache.insert(r.x, r.value);
    records.clear();
  };

  int i = 0;
  try {
    // m^{0,0}: one gradient estimate at the start point; its norm later
    // becomes the threshold scale L.
    SmoothingConfig cfg0 = params.smoothing;
    cfg0.beta = params.schedule.beta(0);
    if (params.max_evals < cfg0.evals_per_estimate()) {
      res.reason = SsoStop::budget_exhausted;
      return res;
    }
    const GradientEstimate init = gradient_estimate(oracle, res.x, cfg0, seq, recorder);
    flush_records();
    res.m = init.g;
    res.init_evals = init.evals_used;
    res.evals_used = init.evals_used;
    res.best_f = init.min_observed;
    res.momentum_scale = l2_norm(res.m);

    {
      const StepSchedule sched0 = params.schedule.inner(0);
      TraceRecord rec;
      rec.k = 0;
      rec.i = 0;
      rec.cum_evals = res.evals_used;
      rec.beta = cfg0.beta;
      rec.m_norm = res.momentum_scale;
      rec.s1 = sched0.s1(0);
      rec.s2 = sched0.s2(0);
      rec.best_f = res.best_f;
      res.trace.push_back(rec);
    }

    const auto run_subproblem = [&](double threshold, bool search_phase) {
      ZosParams zp;
      zp.x0 = res.x;
      zp.m0 = res.m;
      zp.threshold = threshold;
      zp.min_iters = params.min_iters;
      zp.max_evals = params.max_evals - res.evals_used;
      SmoothingConfig cfg = params.smoothing;
      cfg.beta = params.schedule.beta(i);
      zp.smoothing = cfg;
      zp.schedule = params.schedule.inner(i);
      zp.bounds = params.bounds;
      zp.subproblem = i;
      zp.cum_evals_base = res.evals_used;
      zp.best_f_in = res.best_f;
      zp.trace_stride = params.trace_stride;
      zp.observer = params.observer;
      zp.recorder = search_phase ? recorder : nullptr;
      zp.trace_sink = &res.trace;  // keep partial rows if an eval fails
      ZosResult zres = run_zos(oracle, zp, seq);
      if (search_phase) flush_records();

      res.evals_used += zres.evals_used;
      res.best_f = std::min(res.best_f, zres.best_f);

      SubproblemSummary sum;
      sum.i = i;
      sum.search_phase = search_phase;
      sum.beta = cfg.beta;
      sum.threshold = threshold;
      sum.iterations = zres.iterations;
      sum.evals = zres.evals_used;
      sum.reason = zres.reason;
      sum.final_m_norm = zres.final_m_norm;
      res.summaries.push_back(sum);
      return zres;
    };

    // Search step (optional): run M-iteration solves, then restart from the
    // best cached point. The momentum threshold is disabled (L = +inf).
    if (search_enabled) {
      const std::uint64_t m_u = static_cast<std::uint64_t>(params.min_iters);
      const std::uint64_t q_u = static_cast<std::uint64_t>(params.smoothing.q);
      std::uint64_t search_evals = 0;
      while (m_u * static_cast<std::uint64_t>(i + 1) * q_u <= params.search_budget &&
             search_evals < params.search_budget) {
        ZosResult zres = run_subproblem(std::numeric_limits<double>::infinity(), true);
        search_evals += zres.evals_used;
        res.m = std::move(zres.state.m);
        if (!cache.empty()) {
          res.x = search_restart(cache);
          if (params.bounds) project_box_in_place(res.x, *params.bounds);
        }
        if (zres.reason == StopReason::budget_exhausted) {
          res.reason = SsoStop::budget_exhausted;
          res.subproblems_run = i + 1;
          return res;
        }
        i += 1;
      }
    }

    const double scale = res.momentum_scale;  // L = ||m^{0,0}||

    // Local step: shrinking beta^i with warm starts until beta^i <= epsilon.
    while (params.schedule.beta(i) > params.schedule.epsilon) {
      const double tau = scale * params.schedule.beta(i) / (4.0 * params.schedule.beta0);
      ZosResult zres = run_subproblem(tau, false);
      res.m = std::move(zres.state.m);
      res.x = std::move(zres.state.x);
      if (zres.reason == StopReason::budget_exhausted) {
        res.reason = SsoStop::budget_exhausted;
        res.subproblems_run = i + 1;
        return res;
      }
      i += 1;
    }
    res.reason = SsoStop::epsilon_reached;
    res.subproblems_run = i;
  } catch (const EvalError& e) {
    res.reason = SsoStop::oracle_error;
    res.error = e.what();
    res.subproblems_run = i;
    if (!res.trace.empty()) res.evals_used = res.trace.back().cum_evals;
  }
  return res;
}

}  // namespace zo
