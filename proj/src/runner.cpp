#include "zo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "zo/parallel.hpp"
#include "zo/subprocess_oracle.hpp"

namespace zo {

void apply_gradient_step(std::span<double> x, std::span<const double> g, double step,
                         const BoxBounds* bounds) {
  if (x.size() != g.size()) throw std::invalid_argument("gradient step: size mismatch");
  for (std::size_t j = 0; j < x.size(); ++j) x[j] -= step * g[j];
  if (bounds) project_box_in_place(x, *bounds);
}

std::unique_ptr<Oracle> build_oracle(const RunConfig& cfg) {
  if (cfg.problem == "subprocess") {
    SubprocessConfig sc;
    sc.command = cfg.subprocess_cmd;
    sc.timeout_ms = static_cast<int>(cfg.subprocess_timeout_ms);
    return make_subprocess_oracle(static_cast<int>(cfg.n), sc);
  }
  const NoiseModel noise = NoiseModel::parse(cfg.noise, cfg.noise_param);
  return make_synthetic(cfg.problem, static_cast<int>(cfg.n), noise, cfg.seed);
}

std::optional<BoxBounds> build_bounds(const RunConfig& cfg) {
  if (!cfg.bounded) return std::nullopt;
  return BoxBounds::uniform(static_cast<int>(cfg.n), cfg.bounds_lower, cfg.bounds_upper);
}

std::vector<double> default_start_point(const RunConfig& cfg, const BoxBounds* bounds) {
  std::vector<double> x0(static_cast<std::size_t>(cfg.n), 1.0);
  if (bounds) project_box_in_place(x0, *bounds);
  return x0;
}

namespace {

SmoothingConfig smoothing_from_config(const RunConfig& cfg) {
  SmoothingConfig s;
  s.beta = cfg.beta0;
  s.q = static_cast<int>(cfg.q);
  if (cfg.estimator == "gaussian") {
    s.kernel = Kernel::gaussian;
  } else if (cfg.estimator == "gaussian-truncated") {
    s.kernel = Kernel::gaussian_truncated;
  } else {
    s.kernel = Kernel::uniform_sphere;
  }
  s.base_mode = cfg.base_mode == "shared" ? BaseMode::shared : BaseMode::per_sample;
  return s;
}

SubproblemSchedule schedule_from_config(const RunConfig& cfg) {
  SubproblemSchedule sched;
  sched.beta0 = cfg.beta0;
  sched.s1_00 = cfg.s1_00;
  sched.s2_00 = cfg.s2_00;
  sched.epsilon = cfg.epsilon;
  sched.alpha1 = cfg.alpha1;
  sched.alpha2 = cfg.alpha2;
  sched.mode = cfg.schedule_mode == "convex" ? SubproblemSchedule::Mode::convex
                                             : SubproblemSchedule::Mode::standard;
  sched.rho = cfg.rho;
  return sched;
}

std::int64_t effective_max_iters(const RunConfig& cfg) {
  return cfg.max_iters > 0 ? cfg.max_iters : std::numeric_limits<std::int64_t>::max();
}

TraceRecord init_record(double beta, double m_norm, double s1, double s2, std::uint64_t evals,
                        double best_f) {
  TraceRecord rec;
  rec.k = 0;
  rec.i = 0;
  rec.cum_evals = evals;
  rec.beta = beta;
  rec.m_norm = m_norm;
  rec.s1 = s1;
  rec.s2 = s2;
  rec.best_f = best_f;
  return rec;
}

// Standalone sign-of-momentum run: the initialization estimate at x0 becomes
// m^0 and the first trace row.
void run_zos_config(const Oracle& oracle, const RunConfig& cfg, const BoxBounds* bounds,
                    RngSequencer& seq, AlgorithmOutcome& out) {
  const SmoothingConfig smoothing = smoothing_from_config(cfg);
  StepSchedule schedule;
  schedule.s1_0 = cfg.s1_00;
  schedule.s2_0 = cfg.s2_00;
  schedule.alpha1 = cfg.alpha1;
  schedule.alpha2 = cfg.alpha2;

  ZosParams zp;
  zp.x0 = default_start_point(cfg, bounds);
  const GradientEstimate init = gradient_estimate(oracle, zp.x0, smoothing, seq);
  out.trace.push_back(init_record(smoothing.beta, l2_norm(init.g), schedule.s1(0), schedule.s2(0),
                                  init.evals_used, init.min_observed));

  zp.m0 = init.g;
  zp.threshold = cfg.tau;
  zp.min_iters = cfg.min_iters;
  zp.max_iters = effective_max_iters(cfg);
  zp.max_evals = cfg.max_evals > init.evals_used ? cfg.max_evals - init.evals_used : 0;
  zp.smoothing = smoothing;
  zp.schedule = schedule;
  zp.bounds = bounds;
  zp.cum_evals_base = init.evals_used;
  zp.best_f_in = init.min_observed;
  zp.trace_stride = cfg.trace_stride;
  zp.trace_sink = &out.trace;
  out.evals_used = init.evals_used;
  out.best_f = init.min_observed;

  const ZosResult res = run_zos(oracle, zp, seq);
  out.x_final = res.state.x;
  out.evals_used = init.evals_used + res.evals_used;
  out.best_f = res.best_f;
  out.exit_reason = to_string(res.reason);
  out.error_detail = res.reason_detail;
}

// ZO-SGD baseline: the s2 == 1 degenerate of the momentum loop with a plain
// magnitude step x <- x - s^k g. Shares the initialization estimate and the
// per-step eval cost, so its trace grid matches the other algorithms.
void run_zo_sgd_config(const Oracle& oracle, const RunConfig& cfg, const BoxBounds* bounds,
                       RngSequencer& seq, AlgorithmOutcome& out) {
  const SmoothingConfig smoothing = smoothing_from_config(cfg);
  StepSchedule schedule;
  schedule.s1_0 = cfg.s1_00;
  schedule.s2_0 = cfg.s2_00;
  schedule.alpha1 = cfg.alpha1;
  schedule.alpha2 = cfg.alpha2;

  std::vector<double> x = default_start_point(cfg, bounds);
  const GradientEstimate init = gradient_estimate(oracle, x, smoothing, seq);
  out.trace.push_back(init_record(smoothing.beta, l2_norm(init.g), schedule.s1(0), schedule.s2(0),
                                  init.evals_used, init.min_observed));
  out.evals_used = init.evals_used;
  out.best_f = init.min_observed;

  const std::uint64_t step_cost = smoothing.evals_per_estimate();
  const std::int64_t max_iters = effective_max_iters(cfg);
  std::int64_t k = 0;
  out.exit_reason = "budget-exhausted";
  out.error_detail = "max-iters";
  while (k < max_iters) {
    if (out.evals_used + step_cost > cfg.max_evals) {
      out.error_detail = "max-evals";
      break;
    }
    const GradientEstimate est = gradient_estimate(oracle, x, smoothing, seq);
    const double step = schedule.s1(k);
    apply_gradient_step(x, est.g, step, bounds);
    out.evals_used += est.evals_used;
    out.best_f = std::min(out.best_f, est.min_observed);
    ++k;
    if (k % std::max<std::int64_t>(cfg.trace_stride, 1) == 0) {
      TraceRecord rec;
      rec.k = k;
      rec.i = 0;
      rec.cum_evals = out.evals_used;
      rec.beta = smoothing.beta;
      rec.m_norm = l2_norm(est.g);  // the baseline has no momentum; record ||g||
      rec.s1 = step;
      rec.s2 = 0.0;
      rec.best_f = out.best_f;
      out.trace.push_back(rec);
    }
  }
  out.x_final = std::move(x);
}

void run_sso_config(const Oracle& oracle, const RunConfig& cfg, const BoxBounds* bounds,
                    RngSequencer& seq, AlgorithmOutcome& out) {
  SsoParams sp;
  sp.x0 = default_start_point(cfg, bounds);
  sp.schedule = schedule_from_config(cfg);
  sp.smoothing = smoothing_from_config(cfg);
  sp.min_iters = cfg.min_iters;
  sp.search_budget = cfg.search_budget;
  sp.max_evals = cfg.max_evals;
  sp.bounds = bounds;
  sp.trace_stride = cfg.trace_stride;

  const SsoResult res = run_sso(oracle, sp, seq);
  out.trace = res.trace;
  out.x_final = res.x;
  out.evals_used = res.evals_used;
  out.best_f = res.best_f;
  out.exit_reason = to_string(res.reason);
  out.error_detail = res.error;
  out.summaries = res.summaries;
  out.momentum_scale = res.momentum_scale;
}

}  // namespace

AlgorithmOutcome execute_run(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.threads > 0) set_max_threads(static_cast<int>(cfg.threads));
  const auto t0 = std::chrono::steady_clock::now();

  auto oracle = build_oracle(cfg);
  const auto bounds = build_bounds(cfg);
  const BoxBounds* bp = bounds ? &*bounds : nullptr;
  RngSequencer seq(cfg.seed);

  AlgorithmOutcome out;
  try {
    if (cfg.algorithm == "sso") {
      run_sso_config(*oracle, cfg, bp, seq, out);
    } else if (cfg.algorithm == "zos") {
      run_zos_config(*oracle, cfg, bp, seq, out);
    } else {
      run_zo_sgd_config(*oracle, cfg, bp, seq, out);
    }
  } catch (const EvalError& e) {
    // keep the partial trace; the failure is the exit reason
    out.exit_reason = "oracle-error";
    out.error_detail = e.what();
    if (!out.trace.empty()) out.evals_used = out.trace.back().cum_evals;
    return out;
  }

  if (cfg.timing && !out.trace.empty()) {
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.trace.back().wall_ms = elapsed;
  }

  // Summary estimate at the returned point: 30 fresh draws from a dedicated
  // stream, never charged to the optimization budget.
  if (!out.x_final.empty()) {
    double sum = 0.0;
    for (int r = 0; r < 30; ++r) {
      Rng rng(cfg.seed, Stream::summary, static_cast<std::uint64_t>(r));
      try {
        sum += oracle->eval(out.x_final, rng);
      } catch (const EvalError&) {
        out.final_f_mean = std::numeric_limits<double>::quiet_NaN();
        return out;
      }
    }
    out.final_f_mean = sum / 30.0;
  }
  return out;
}

std::string render_summary(const RunConfig& cfg, const AlgorithmOutcome& out) {
  std::ostringstream os;
  os << "algorithm = " << cfg.algorithm << '\n';
  os << "problem = " << cfg.problem << '\n';
  os << "n = " << cfg.n << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "exit_reason = " << out.exit_reason << '\n';
  if (!out.error_detail.empty()) os << "detail = " << out.error_detail << '\n';
  os << "evals_used = " << out.evals_used << '\n';
  os << "subproblems = " << out.summaries.size() << '\n';
  os << "best_observed_f = " << format_g17(out.best_f) << '\n';
  os << "final_f_estimate = " << format_g17(out.final_f_mean) << '\n';
  os << "x_final =";
  for (double v : out.x_final) os << ' ' << format_g17(v);
  os << '\n';
  return os.str();
}

std::vector<MultiSeedRow> run_multi_seed(const RunConfig& cfg, int seed_count,
                                         std::vector<AlgorithmOutcome>* outcomes) {
  if (seed_count < 1) throw std::invalid_argument("multi-seed: seed count must be >= 1");
  std::vector<AlgorithmOutcome> outs(static_cast<std::size_t>(seed_count));
  // Each seed is fully isolated (own oracle, own rng); runs may go parallel.
  parallel_for(static_cast<std::uint64_t>(seed_count), true, [&](std::uint64_t s) {
    RunConfig c = cfg;
    c.seed = cfg.seed + s;
    c.threads = 1;  // no nested parallelism inside concurrent runs
    outs[s] = execute_run(c);
  });

  std::size_t rows = outs[0].trace.size();
  for (const auto& o : outs) rows = std::min(rows, o.trace.size());

  std::vector<MultiSeedRow> table(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    MultiSeedRow& row = table[r];
    row.cum_evals = outs[0].trace[r].cum_evals;
    double sum = 0.0, sum_sq = 0.0;
    row.min = outs[0].trace[r].best_f;
    row.max = outs[0].trace[r].best_f;
    for (const auto& o : outs) {
      const double v = o.trace[r].best_f;
      sum += v;
      sum_sq += v * v;
      row.min = std::min(row.min, v);
      row.max = std::max(row.max, v);
    }
    const double m = sum / seed_count;
    row.mean = m;
    row.stdev = seed_count > 1
                    ? std::sqrt(std::max(0.0, (sum_sq - seed_count * m * m) / (seed_count - 1)))
                    : 0.0;
  }
  if (outcomes) *outcomes = std::move(outs);
  return table;
}

std::string render_multi_seed_csv(const std::vector<MultiSeedRow>& rows) {
  std::ostringstream os;
  os << "cum_evals,best_f_mean,best_f_std,best_f_min,best_f_max\n";
  for (const auto& r : rows) {
    os << r.cum_evals << ',' << format_g17(r.mean) << ',' << format_g17(r.stdev) << ','
       << format_g17(r.min) << ',' << format_g17(r.max) << '\n';
  }
  return os.str();
}

}  // namespace zo
