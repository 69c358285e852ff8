#include <cmath>
#include <vector>

#include "doctest.h"
#include "zo/sso.hpp"

using namespace zo;

namespace {

SsoParams base_params() {
  SsoParams p;
  p.x0 = {1.0, 1.0, 1.0};
  p.schedule.beta0 = 0.3;
  p.schedule.s1_00 = 0.1;
  p.schedule.s2_00 = 0.5;
  p.schedule.epsilon = 1e-2;
  p.schedule.alpha1 = 0.5;
  p.schedule.alpha2 = 0.25;
  p.smoothing = SmoothingConfig{0.3, 4, Kernel::gaussian, BaseMode::shared};
  p.min_iters = 3;
  p.max_evals = 50000;
  return p;
}

}  // namespace

TEST_CASE("subproblem schedule closed forms") {
  SubproblemSchedule s;
  s.beta0 = 0.3;
  s.s1_00 = 0.1;
  s.s2_00 = 0.5;
  CHECK(s.beta(2) == doctest::Approx(0.3 / 9.0).epsilon(1e-15));
  CHECK(s.s1_0(2) == doctest::Approx(0.1 / std::pow(3.0, 1.5)).epsilon(1e-15));
  CHECK(s.s2_0(2) == doctest::Approx(0.5 / 3.0).epsilon(1e-15));
  CHECK(s.beta(0) == 0.3);
}

TEST_CASE("convex mode swaps in the 2rho/(k+1) schedule") {
  SubproblemSchedule s;
  s.mode = SubproblemSchedule::Mode::convex;
  s.rho = 0.25;
  s.validate();
  const StepSchedule inner = s.inner(3);
  CHECK(inner.s1(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(inner.s1(4) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(inner.s2(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(inner.s2(7) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));

  SubproblemSchedule bad = s;
  bad.rho = 0.75;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("eval cache returns the best mean with earliest-insertion ties") {
  EvalCache cache;
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {3.0, 4.0};
  cache.insert(a, 3.0);
  cache.insert(b, 1.0);
  CHECK(search_restart(cache) == b);

  EvalCache tie;
  tie.insert(a, 1.0);
  tie.insert(b, 1.0);
  CHECK(search_restart(tie) == a);

  EvalCache mean;
  mean.insert(a, 2.0);
  mean.insert(a, 0.0);  // mean 1.0
  mean.insert(b, 1.5);
  CHECK(search_restart(mean) == a);

  EvalCache empty;
  CHECK_THROWS_AS(search_restart(empty), std::runtime_error);
}

TEST_CASE("degenerate epsilon runs zero local subproblems") {
  auto oracle = make_synthetic("sphere", 3, NoiseModel::none(), 0);
  SsoParams p = base_params();
  p.schedule.epsilon = p.schedule.beta0;  // beta^0 > eps is false immediately
  RngSequencer seq(1);
  const SsoResult res = run_sso(*oracle, p, seq);
  CHECK(res.subproblems_run == 0);
  CHECK(res.summaries.empty());
  CHECK(res.x == p.x0);
  CHECK(res.reason == SsoStop::epsilon_reached);
  // the m^{0,0} estimate still ran
  CHECK(res.init_evals == 5);
  CHECK(res.evals_used == 5);
  CHECK(res.trace.size() == 1);
  CHECK(res.trace[0].k == 0);
}

TEST_CASE("beta sequence follows the closed form exactly") {
  auto oracle = make_synthetic("sphere", 3, NoiseModel::none(), 0);
  SsoParams p = base_params();
  RngSequencer seq(2);
  const SsoResult res = run_sso(*oracle, p, seq);
  REQUIRE(!res.summaries.empty());
  for (const SubproblemSummary& s : res.summaries) {
    const double d = static_cast<double>(s.i) + 1.0;
    CHECK(s.beta == p.schedule.beta0 / (d * d));
  }
}

TEST_CASE("thresholds decrease strictly and exits obey them") {
  auto oracle = make_synthetic("sphere", 3, NoiseModel::additive_gaussian(0.005), 0);
  SsoParams p = base_params();
  RngSequencer seq(3);
  const SsoResult res = run_sso(*oracle, p, seq);
  REQUIRE(res.summaries.size() >= 2);
  for (std::size_t j = 1; j < res.summaries.size(); ++j) {
    CHECK(res.summaries[j].threshold < res.summaries[j - 1].threshold);
  }
  for (const SubproblemSummary& s : res.summaries) {
    if (s.reason == StopReason::threshold_met) {
      CHECK(s.final_m_norm <= s.threshold);
    }
  }
  // tau_i = L beta^i / (4 beta^0)
  for (const SubproblemSummary& s : res.summaries) {
    const double expected = res.momentum_scale * s.beta / (4.0 * p.schedule.beta0);
    CHECK(s.threshold == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("eval accounting closes across subproblems") {
  auto oracle = make_synthetic("sphere", 3, NoiseModel::none(), 0);
  oracle->reset_eval_count();
  SsoParams p = base_params();
  RngSequencer seq(4);
  const SsoResult res = run_sso(*oracle, p, seq);
  std::uint64_t total = res.init_evals;
  for (const SubproblemSummary& s : res.summaries) total += s.evals;
  CHECK(total == res.evals_used);
  CHECK(oracle->eval_count() == res.evals_used);
  CHECK(res.trace.back().cum_evals == res.evals_used);
}

TEST_CASE("warm starts hand over m and x bitwise") {
  // Re-run subproblem 0 in isolation and check subproblem 1 starts from its
  // exact final state: the first trace row of subproblem 1 must continue the
  // momentum recursion seeded with subproblem 0's final m.
  auto oracle = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  SsoParams p = base_params();
  p.x0 = {1.0, -1.0};
  RngSequencer seq(5);
  const SsoResult res = run_sso(*oracle, p, seq);
  REQUIRE(res.summaries.size() >= 2);

  // Replay: same oracle and seed, run the init estimate + subproblem 0
  // manually, then compare with the driver's state at the boundary.
  auto oracle2 = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  RngSequencer seq2(5);
  SmoothingConfig cfg0 = p.smoothing;
  cfg0.beta = p.schedule.beta(0);
  const GradientEstimate init = gradient_estimate(*oracle2, p.x0, cfg0, seq2);
  ZosParams zp;
  zp.x0 = p.x0;
  zp.m0 = init.g;
  zp.threshold = l2_norm(init.g) * p.schedule.beta(0) / (4.0 * p.schedule.beta0);
  zp.min_iters = p.min_iters;
  zp.smoothing = cfg0;
  zp.schedule = p.schedule.inner(0);
  const ZosResult z0 = run_zos(*oracle2, zp, seq2);

  // the boundary row in the full trace equals the isolated run's last row
  const TraceRecord& boundary = res.trace[static_cast<std::size_t>(z0.iterations)];
  CHECK(boundary.m_norm == z0.final_m_norm);
  CHECK(boundary.i == 0);
  CHECK(res.trace[static_cast<std::size_t>(z0.iterations) + 1].i == 1);
}

TEST_CASE("global budget exhaustion is a normal exit") {
  auto oracle = make_synthetic("sphere", 3, NoiseModel::additive_gaussian(0.3), 0);
  SsoParams p = base_params();
  p.schedule.epsilon = 1e-9;  // unreachable
  p.max_evals = 2000;
  RngSequencer seq(6);
  const SsoResult res = run_sso(*oracle, p, seq);
  CHECK(res.reason == SsoStop::budget_exhausted);
  CHECK(res.evals_used <= p.max_evals);
  REQUIRE(!res.summaries.empty());
  CHECK(res.summaries.back().reason == StopReason::budget_exhausted);
}

TEST_CASE("search phase restarts from the cached best point") {
  auto oracle = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  SsoParams p = base_params();
  p.x0 = {1.0, -1.0};
  p.min_iters = 2;
  p.smoothing.q = 2;
  p.search_budget = 30;  // allows search subproblems while 2*(i+1)*2 <= 30
  RngSequencer seq(7);
  const SsoResult res = run_sso(*oracle, p, seq);
  REQUIRE(!res.summaries.empty());
  CHECK(res.summaries.front().search_phase);
  // search solves run the forced minimum only: M+1 iterations
  CHECK(res.summaries.front().iterations == p.min_iters + 1);
  std::size_t searches = 0;
  for (const auto& s : res.summaries) searches += s.search_phase ? 1 : 0;
  CHECK(searches >= 2);
  // local phase continues the shared subproblem counter
  bool seen_local = false;
  for (const auto& s : res.summaries) {
    if (!s.search_phase) {
      seen_local = true;
      CHECK(static_cast<std::size_t>(s.i) >= searches);
    }
  }
  CHECK(seen_local);
}

TEST_CASE("oracle failures surface as a partial result") {
  // A sphere oracle with multiplicative noise large enough to overflow is
  // hard to build; instead, drive the rosenbrock to +inf via huge steps is
  // still finite. Use a quadratic with inf-producing scale: the cleanest
  // deterministic failure is a dimension mismatch via a custom x0, which
  // throws std::invalid_argument instead. Here we check the EvalError path
  // through a constant oracle wrapper that fails on the nth call.
  class FailingOracle final : public Oracle {
   public:
    explicit FailingOracle(int n) : Oracle(n) {}
    std::string name() const override { return "failing"; }

   protected:
    double eval_impl(std::span<const double>, Rng&) const override {
      if (eval_count() > 20) throw EvalError("synthetic failure");
      return 1.0;
    }
  };
  FailingOracle oracle(2);
  SsoParams p = base_params();
  p.x0 = {0.5, 0.5};
  RngSequencer seq(8);
  const SsoResult res = run_sso(oracle, p, seq);
  CHECK(res.reason == SsoStop::oracle_error);
  CHECK(!res.error.empty());
}

TEST_CASE("x0 outside the bounds is rejected") {
  auto oracle = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  SsoParams p = base_params();
  p.x0 = {2.0, 2.0};
  const BoxBounds bounds = BoxBounds::uniform(2, -1.0, 1.0);
  p.bounds = &bounds;
  RngSequencer seq(9);
  CHECK_THROWS_AS(run_sso(*oracle, p, seq), std::invalid_argument);
}

TEST_CASE("sso runs are bitwise deterministic") {
  const auto run_once = [] {
    auto oracle = make_synthetic("sphere", 4, NoiseModel::additive_gaussian(0.02), 3);
    SsoParams p;
    p.x0 = {1.0, -0.5, 0.75, 0.25};
    p.schedule.beta0 = 0.3;
    p.schedule.s1_00 = 0.1;
    p.schedule.s2_00 = 0.5;
    p.schedule.epsilon = 5e-3;
    p.smoothing = SmoothingConfig{0.3, 5, Kernel::gaussian, BaseMode::shared};
    p.min_iters = 4;
    p.max_evals = 20000;
    p.search_budget = 100;
    RngSequencer seq(31);
    return run_sso(*oracle, p, seq);
  };
  const SsoResult a = run_once();
  const SsoResult b = run_once();
  CHECK(a.trace == b.trace);
  CHECK(a.x == b.x);
  CHECK(a.m == b.m);
  CHECK(a.evals_used == b.evals_used);
}
