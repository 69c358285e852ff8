#include <cmath>
#include <sstream>

#include "doctest.h"
#include "zo/config.hpp"
#include "zo/rng.hpp"
#include "zo/trace.hpp"

using namespace zo;

TEST_CASE("g17 formatting round-trips doubles exactly") {
  Rng rng(1, Stream::replicate, 4);
  for (int t = 0; t < 1000; ++t) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    const std::string s = format_g17(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(std::stod(format_g17(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("trace files round-trip bitwise") {
  RunTrace trace;
  Rng rng(2, Stream::replicate, 5);
  for (int r = 0; r < 50; ++r) {
    TraceRecord rec;
    rec.k = r;
    rec.i = r / 10;
    rec.cum_evals = static_cast<std::uint64_t>(r) * 11;
    rec.beta = 0.3 / ((r / 10 + 1.0) * (r / 10 + 1.0));
    rec.m_norm = rng.uniform01() * 3.0;
    rec.s1 = rng.uniform01();
    rec.s2 = rng.uniform01();
    rec.best_f = rng.uniform(-5.0, 5.0);
    rec.wall_ms = 0.0;
    trace.push_back(rec);
  }
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  const RunTrace back = read_trace_csv(is);
  CHECK(back == trace);
}

TEST_CASE("config serialization round-trips losslessly") {
  RunConfig cfg;
  cfg.problem = "quadratic";
  cfg.n = 12;
  cfg.noise = "additive-gaussian";
  cfg.noise_param = 0.037;
  cfg.algorithm = "sso";
  cfg.beta0 = 1.0 / 3.0;
  cfg.s1_00 = 0.123456789012345;
  cfg.s2_00 = 0.5;
  cfg.alpha1 = 0.75;
  cfg.alpha2 = 0.5;
  cfg.q = 7;
  cfg.min_iters = 9;
  cfg.search_budget = 1234;
  cfg.epsilon = 1e-4;
  cfg.max_evals = 999999;
  cfg.seed = 424242;
  cfg.trace_path = "out/trace.csv";
  cfg.bounded = true;
  cfg.bounds_lower = -1.5;
  cfg.bounds_upper = 2.5;
  cfg.timing = true;

  const std::string text = serialize_config(cfg);
  const RunConfig back = parse_config_text(text);
  CHECK(back == cfg);
}

TEST_CASE("unknown and malformed fields are named") {
  CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 3\n"),
                       doctest::Contains("bogus_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n = banana\n"), doctest::Contains("\"n\""),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n = 5\nn = 6\n"), doctest::Contains("duplicate"),
                       ConfigError);
}

TEST_CASE("validation names the offending field") {
  RunConfig cfg;  // n defaults to 0
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("\"n\""), ConfigError);

  cfg.n = 5;
  cfg.algorithm = "simplex";
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("\"algorithm\""), ConfigError);

  cfg.algorithm = "sso";
  cfg.s2_00 = 1.5;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("\"s2_00\""), ConfigError);

  cfg.s2_00 = 0.5;
  cfg.bounded = true;
  cfg.bounds_lower = 1.0;
  cfg.bounds_upper = 1.0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("\"bounds_lower\""), ConfigError);

  cfg.bounded = false;
  cfg.problem = "subprocess";
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("\"subprocess_cmd\""), ConfigError);
}

TEST_CASE("presets reproduce the hyperparameter table") {
  RunConfig cfg;
  cfg.n = 10;
  apply_preset(cfg, "solar");
  CHECK(cfg.beta0 == 0.3);
  CHECK(cfg.s1_00 == 0.1);
  CHECK(cfg.s2_00 == 0.5);
  CHECK(cfg.min_iters == 5);
  CHECK(cfg.q == 10);
  CHECK(cfg.alpha1 == 0.5);
  CHECK(cfg.alpha2 == 0.25);

  apply_preset(cfg, "cifar10");
  CHECK(cfg.beta0 == 0.005);
  CHECK(cfg.s1_00 == 0.005);
  CHECK(cfg.s2_00 == 0.9);
  CHECK(cfg.min_iters == 60);

  apply_preset(cfg, "imagenet");
  CHECK(cfg.beta0 == 0.001);
  CHECK(cfg.s1_00 == 0.003);
  CHECK(cfg.s2_00 == 0.7);
  CHECK(cfg.min_iters == 100);

  CHECK_THROWS_AS(apply_preset(cfg, "mnist"), ConfigError);
}

TEST_CASE("preset search default switches on dimension") {
  RunConfig small = parse_config_text("preset = solar\nn = 10\n");
  CHECK(small.search_budget == 200);  // 4 M q

  RunConfig large = parse_config_text("preset = solar\nn = 100\n");
  CHECK(large.search_budget == 0);

  RunConfig forced = parse_config_text("preset = solar\nn = 10\nsearch_budget = 7\n");
  CHECK(forced.search_budget == 7);
}

TEST_CASE("print-preset emits the schedule formulas") {
  const std::string s = print_preset("solar");
  CHECK(s.find("beta^i   = 0.3/(i+1)^2") != std::string::npos);
  CHECK(s.find("s1^{i,k} = 0.1/((i+1)^{3/2} sqrt(k+1))") != std::string::npos);
  CHECK(s.find("s2^{i,k} = 0.5/((i+1)(k+1)^{1/4})") != std::string::npos);
  CHECK(s.find("M = 5") != std::string::npos);
  CHECK(s.find("q = 10") != std::string::npos);
}
