#include <cmath>
#include <vector>

#include "doctest.h"
#include "zo/zo_signum.hpp"

using namespace zo;

TEST_CASE("momentum update is the stated convex combination") {
  std::vector<double> m = {0.0, 0.0};
  apply_momentum_update(m, std::vector<double>{2.0, -4.0}, 0.5);
  CHECK(m == std::vector<double>{1.0, -2.0});

  std::vector<double> x = {0.0, 0.0};
  apply_sign_step(x, m, 0.1, nullptr);
  CHECK(x == std::vector<double>{-0.1, 0.1});
}

TEST_CASE("momentum fixed point: g equal to m leaves m unchanged") {
  Rng rng(4, Stream::replicate, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> m(4), g(4);
    for (int j = 0; j < 4; ++j) m[j] = rng.uniform(-2.0, 2.0);
    g = m;
    const std::vector<double> before = m;
    apply_momentum_update(m, g, rng.uniform01());
    for (int j = 0; j < 4; ++j) CHECK(m[j] == doctest::Approx(before[j]).epsilon(1e-15));
  }
}

TEST_CASE("momentum norm never exceeds max of inputs") {
  Rng rng(5, Stream::replicate, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> m(6), g(6);
    for (int j = 0; j < 6; ++j) {
      m[j] = rng.uniform(-3.0, 3.0);
      g[j] = rng.uniform(-3.0, 3.0);
    }
    const double bound = std::max(l2_norm(m), l2_norm(g));
    apply_momentum_update(m, g, rng.uniform01());
    CHECK(l2_norm(m) <= bound + 1e-12);
  }
}

TEST_CASE("sign of zero moves nothing") {
  CHECK(sign0(0.0) == 0.0);
  CHECK(sign0(-0.0) == 0.0);
  CHECK(sign0(3.5) == 1.0);
  CHECK(sign0(-0.1) == -1.0);
  std::vector<double> x = {1.0, 2.0};
  apply_sign_step(x, std::vector<double>{0.0, -1.0}, 0.25, nullptr);
  CHECK(x == std::vector<double>{1.0, 2.25});
}

TEST_CASE("iterates move by exactly s1 in the max norm") {
  Rng rng(6, Stream::replicate, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(5), m(5);
    for (int j = 0; j < 5; ++j) {
      x[j] = rng.uniform(-1.0, 1.0);
      m[j] = rng.uniform(-1.0, 1.0);  // almost surely no zero component
    }
    const std::vector<double> before = x;
    const double s1 = rng.uniform(0.0, 0.3);
    apply_sign_step(x, m, s1, nullptr);
    double linf = 0.0;
    for (int j = 0; j < 5; ++j) linf = std::max(linf, std::abs(x[j] - before[j]));
    CHECK(linf == doctest::Approx(s1).epsilon(1e-15));
  }
}

TEST_CASE("momentum decays by the closed-form product on a constant oracle") {
  auto oracle = make_constant(3, 7.0);
  RngSequencer seq(8);
  ZosParams params;
  params.x0 = {0.5, -0.5, 0.25};
  params.m0 = {1.0, -2.0, 0.5};
  params.threshold = 1e-300;  // never met before the iteration cap
  params.min_iters = 0;
  params.max_iters = 100;
  params.smoothing = SmoothingConfig{0.3, 2, Kernel::gaussian, BaseMode::shared};
  params.schedule.s1_0 = 0.1;
  params.schedule.s2_0 = 0.9;
  params.schedule.alpha1 = 0.75;
  params.schedule.alpha2 = 0.5;

  const ZosResult res = run_zos(*oracle, params, seq);
  CHECK(res.iterations == 100);
  CHECK(res.reason == StopReason::budget_exhausted);

  double product = 1.0;
  for (std::int64_t k = 0; k < 100; ++k) product *= 1.0 - params.schedule.s2(k);
  const double expected = l2_norm(params.m0) * product;
  CHECK(std::abs(res.final_m_norm - expected) / expected <= 1e-12);
}

TEST_CASE("constant oracle with zero momentum exits after the forced iterations") {
  auto oracle = make_constant(2, 1.0);
  RngSequencer seq(9);
  ZosParams params;
  params.x0 = {1.0, 1.0};
  params.m0 = {0.0, 0.0};
  params.threshold = 1e-9;
  params.min_iters = 0;
  params.smoothing = SmoothingConfig{0.1, 1, Kernel::gaussian, BaseMode::shared};
  const ZosResult res = run_zos(*oracle, params, seq);
  // k = 0 <= M forces exactly one iteration; m stays zero so the next check exits
  CHECK(res.iterations == 1);
  CHECK(res.reason == StopReason::threshold_met);
  CHECK(res.trace.size() == 1);
}

TEST_CASE("zero eval budget returns the initial state untouched") {
  auto oracle = make_constant(2, 1.0);
  RngSequencer seq(10);
  ZosParams params;
  params.x0 = {0.7, -0.7};
  params.m0 = {0.5, 0.5};
  params.threshold = 1e-9;
  params.max_evals = 0;
  params.smoothing = SmoothingConfig{0.1, 1, Kernel::gaussian, BaseMode::shared};
  const ZosResult res = run_zos(*oracle, params, seq);
  CHECK(res.iterations == 0);
  CHECK(res.reason == StopReason::budget_exhausted);
  CHECK(res.reason_detail == "max-evals");
  CHECK(res.state.x == params.x0);
  CHECK(res.state.m == params.m0);
  CHECK(res.trace.empty());
  CHECK(oracle->eval_count() == 0);
}

TEST_CASE("runs are bitwise deterministic under a fixed seed") {
  const auto run_once = [] {
    auto oracle = make_synthetic("sphere", 3, NoiseModel::additive_gaussian(0.05), 0);
    RngSequencer seq(77);
    ZosParams params;
    params.x0 = {1.0, -1.0, 0.5};
    params.m0 = {0.0, 0.0, 0.0};
    params.threshold = 1e-4;
    params.min_iters = 5;
    params.max_iters = 400;
    params.smoothing = SmoothingConfig{0.2, 3, Kernel::gaussian, BaseMode::shared};
    params.schedule.s1_0 = 0.1;
    params.schedule.s2_0 = 0.5;
    params.schedule.alpha1 = 0.75;
    params.schedule.alpha2 = 0.5;
    return run_zos(*oracle, params, seq);
  };
  const ZosResult a = run_once();
  const ZosResult b = run_once();
  CHECK(a.trace == b.trace);
  CHECK(a.state.x == b.state.x);
  CHECK(a.state.m == b.state.m);
  CHECK(a.evals_used == b.evals_used);
}

TEST_CASE("trace length equals the iteration count and evals line up") {
  auto oracle = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  oracle->reset_eval_count();
  RngSequencer seq(12);
  ZosParams params;
  params.x0 = {1.0, 1.0};
  params.m0 = {0.0, 0.0};
  params.threshold = 1e-12;  // unreachable within the cap
  params.min_iters = 3;
  params.max_iters = 57;
  params.smoothing = SmoothingConfig{0.1, 4, Kernel::gaussian, BaseMode::shared};
  const ZosResult res = run_zos(*oracle, params, seq);
  CHECK(res.iterations == 57);
  CHECK(res.trace.size() == 57);
  CHECK(res.evals_used == 57ull * 5ull);
  CHECK(oracle->eval_count() == res.evals_used);
  CHECK(res.trace.back().cum_evals == res.evals_used);
  for (std::size_t r = 1; r < res.trace.size(); ++r) {
    CHECK(res.trace[r].cum_evals > res.trace[r - 1].cum_evals);
    CHECK(res.trace[r].k == res.trace[r - 1].k + 1);
  }
}

TEST_CASE("bounds keep the iterates feasible") {
  auto oracle = make_synthetic("sphere", 2, NoiseModel::none(), 0);
  RngSequencer seq(13);
  const BoxBounds bounds = BoxBounds::uniform(2, -0.25, 0.25);
  ZosParams params;
  params.x0 = {0.25, -0.25};
  params.m0 = {0.0, 0.0};
  params.threshold = 1e-12;
  params.min_iters = 0;
  params.max_iters = 50;
  params.smoothing = SmoothingConfig{0.3, 2, Kernel::gaussian, BaseMode::shared};
  params.schedule.s1_0 = 0.4;
  params.schedule.s2_0 = 0.5;
  params.bounds = &bounds;
  const ZosResult res = run_zos(*oracle, params, seq);
  CHECK(bounds.contains(res.state.x));
}

TEST_CASE("invalid schedules are rejected") {
  StepSchedule s;
  s.s1_0 = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  StepSchedule s2;
  s2.alpha1 = 0.4;
  s2.alpha2 = 0.6;
  CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
}
