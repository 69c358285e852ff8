#include <vector>

#include "doctest.h"
#include "zo/parallel.hpp"
#include "zo/smoothing.hpp"

using namespace zo;

// The OpenMP kernels follow the serial reference's chunked summation order,
// so their outputs must agree bitwise regardless of the worker count.

TEST_CASE("smoothed_value: parallel kernel matches the serial reference") {
  auto oracle = make_synthetic("sphere", 6, NoiseModel::additive_gaussian(0.1), 0);
  const std::vector<double> x = {0.2, -0.4, 0.8, 0.0, 1.2, -1.0};
  RngSequencer seq_ref(5), seq_par(5);
  const double ref = reference::smoothed_value(*oracle, x, 0.3, 50000, seq_ref);
  const double par = smoothed_value(*oracle, x, 0.3, 50000, seq_par);
  CHECK(ref == par);
  CHECK(seq_ref.used() == seq_par.used());
}

TEST_CASE("nested gradient: parallel kernel matches the serial reference") {
  auto oracle = make_synthetic("abs-sum", 5, NoiseModel::additive_uniform(0.05), 0);
  const std::vector<double> x = {0.3, -0.3, 0.9, -0.9, 0.1};
  SmoothingConfig cfg{0.25, 3, Kernel::gaussian, BaseMode::shared};
  RngSequencer seq_ref(6), seq_par(6);
  const GradientStats ref = reference::estimate_smoothed_gradient(*oracle, x, cfg, 20000, seq_ref);
  const GradientStats par = estimate_smoothed_gradient(*oracle, x, cfg, 20000, seq_par);
  CHECK(ref.mean == par.mean);
  CHECK(ref.se == par.se);
}

TEST_CASE("results are independent of the worker cap") {
  auto oracle = make_synthetic("sphere", 4, NoiseModel::additive_gaussian(0.02), 0);
  const std::vector<double> x = {1.0, 0.5, -0.5, -1.0};
  SmoothingConfig cfg{0.2, 2, Kernel::uniform_sphere, BaseMode::per_sample};

  set_max_threads(1);
  RngSequencer seq_one(9);
  const GradientStats one = estimate_smoothed_gradient(*oracle, x, cfg, 10000, seq_one);

  set_max_threads(0);
  RngSequencer seq_all(9);
  const GradientStats all = estimate_smoothed_gradient(*oracle, x, cfg, 10000, seq_all);

  CHECK(one.mean == all.mean);
  CHECK(one.se == all.se);
}

TEST_CASE("parallel_for propagates worker exceptions") {
  CHECK_THROWS_AS(parallel_for(1000, true,
                               [](std::uint64_t i) {
                                 if (i == 137) throw EvalError("boom");
                               }),
                  EvalError);
}

TEST_CASE("errors inside parallel kernels carry through") {
  // The rosenbrock blows past double range for huge inputs, producing an
  // EvalError from the finiteness gate even under the parallel kernel.
  auto oracle = make_synthetic("rosenbrock", 3, NoiseModel::none(), 0);
  const std::vector<double> x = {1e200, 1e200, 1e200};
  RngSequencer seq(7);
  CHECK_THROWS_AS(smoothed_value(*oracle, x, 0.1, 50000, seq), EvalError);
}
