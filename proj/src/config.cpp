#include "zo/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "zo/trace.hpp"

namespace zo {

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      {"problem", &RunConfig::problem},
      {"n", &RunConfig::n},
      {"noise", &RunConfig::noise},
      {"noise_param", &RunConfig::noise_param},
      {"subprocess_cmd", &RunConfig::subprocess_cmd},
      {"subprocess_timeout_ms", &RunConfig::subprocess_timeout_ms},
      {"bounded", &RunConfig::bounded},
      {"bounds_lower", &RunConfig::bounds_lower},
      {"bounds_upper", &RunConfig::bounds_upper},
      {"algorithm", &RunConfig::algorithm},
      {"preset", &RunConfig::preset},
      {"beta0", &RunConfig::beta0},
      {"s1_00", &RunConfig::s1_00},
      {"s2_00", &RunConfig::s2_00},
      {"alpha1", &RunConfig::alpha1},
      {"alpha2", &RunConfig::alpha2},
      {"q", &RunConfig::q},
      {"min_iters", &RunConfig::min_iters},
      {"search_budget", &RunConfig::search_budget},
      {"epsilon", &RunConfig::epsilon},
      {"tau", &RunConfig::tau},
      {"max_evals", &RunConfig::max_evals},
      {"max_iters", &RunConfig::max_iters},
      {"estimator", &RunConfig::estimator},
      {"base_mode", &RunConfig::base_mode},
      {"schedule_mode", &RunConfig::schedule_mode},
      {"rho", &RunConfig::rho},
      {"seed", &RunConfig::seed},
      {"trace_path", &RunConfig::trace_path},
      {"summary_path", &RunConfig::summary_path},
      {"trace_stride", &RunConfig::trace_stride},
      {"timing", &RunConfig::timing},
      {"threads", &RunConfig::threads},
  };
  return fields;
}

namespace {

const ConfigField& find_field(const std::string& key) {
  for (const ConfigField& f : config_fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("config error: unknown field \"" + key + "\"");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double_strict(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config error: field \"" + key + "\" expects a number, got \"" + value +
                      "\"");
  }
}

std::int64_t parse_int_strict(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config error: field \"" + key + "\" expects an integer, got \"" + value +
                      "\"");
  }
}

}  // namespace

void set_config_field(RunConfig& cfg, const std::string& key, const std::string& value) {
  const ConfigField& f = find_field(key);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          cfg.*member = value;
        } else if constexpr (std::is_same_v<T, double>) {
          cfg.*member = parse_double_strict(key, value);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            cfg.*member = true;
          } else if (value == "false" || value == "0") {
            cfg.*member = false;
          } else {
            throw ConfigError("config error: field \"" + key + "\" expects true/false, got \"" +
                              value + "\"");
          }
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          const std::int64_t v = parse_int_strict(key, value);
          if (v < 0) throw ConfigError("config error: field \"" + key + "\" must be >= 0");
          cfg.*member = static_cast<std::uint64_t>(v);
        } else {
          cfg.*member = parse_int_strict(key, value);
        }
      },
      f.member);
}

std::string get_config_field(const RunConfig& cfg, const std::string& key) {
  const ConfigField& f = find_field(key);
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return cfg.*member;
        } else if constexpr (std::is_same_v<T, double>) {
          return format_g17(cfg.*member);
        } else if constexpr (std::is_same_v<T, bool>) {
          return (cfg.*member) ? "true" : "false";
        } else {
          return std::to_string(cfg.*member);
        }
      },
      f.member);
}

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config error: line " + std::to_string(line_no) +
                        " is not key = value: \"" + line + "\"");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kv.count(key)) throw ConfigError("config error: duplicate field \"" + key + "\"");
    find_field(key);  // unknown keys fail early
    kv[key] = value;
  }

  RunConfig cfg;
  const auto preset_it = kv.find("preset");
  if (preset_it != kv.end() && !preset_it->second.empty()) {
    apply_preset(cfg, preset_it->second);
  }
  for (const auto& [key, value] : kv) {
    set_config_field(cfg, key, value);
  }
  finalize_preset_defaults(cfg, kv.count("search_budget") > 0);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config error: cannot open file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const ConfigField& f : config_fields()) {
    os << f.key << " = " << get_config_field(cfg, f.key) << '\n';
  }
  return os.str();
}

std::vector<std::string> preset_names() { return {"solar", "cifar10", "imagenet"}; }

bool is_preset(const std::string& name) {
  for (const auto& p : preset_names()) {
    if (p == name) return true;
  }
  return false;
}

namespace {

struct PresetRow {
  double beta_00;
  double s1_base;
  double s2_base;
  std::int64_t m;
  std::int64_t q;
};

PresetRow preset_row(const std::string& name) {
  if (name == "solar") return {0.3, 0.1, 0.5, 5, 10};
  if (name == "cifar10") return {0.005, 0.005, 0.9, 60, 10};
  if (name == "imagenet") return {0.001, 0.003, 0.7, 100, 10};
  throw ConfigError("config error: unknown preset \"" + name + "\"");
}

std::string strip_trailing_zeros(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& name) {
  const PresetRow row = preset_row(name);
  cfg.preset = name;
  cfg.algorithm = "sso";
  cfg.beta0 = row.beta_00;
  cfg.s1_00 = row.s1_base;
  cfg.s2_00 = row.s2_base;
  cfg.alpha1 = 0.5;   // the inner schedules decay as 1/sqrt(k+1)
  cfg.alpha2 = 0.25;  // and 1/(k+1)^{1/4}
  cfg.min_iters = row.m;
  cfg.q = row.q;
}

void finalize_preset_defaults(RunConfig& cfg, bool user_set_search_budget) {
  if (cfg.preset.empty() || user_set_search_budget) return;
  // The search step pays off on small problems only.
  if (cfg.n > 0 && cfg.n <= 20) {
    cfg.search_budget =
        4ull * static_cast<std::uint64_t>(cfg.min_iters) * static_cast<std::uint64_t>(cfg.q);
  }
}

std::string print_preset(const std::string& name) {
  const PresetRow row = preset_row(name);
  std::ostringstream os;
  os << "preset: " << name << '\n';
  os << "beta^i   = " << strip_trailing_zeros(row.beta_00) << "/(i+1)^2\n";
  os << "s1^{i,k} = " << strip_trailing_zeros(row.s1_base) << "/((i+1)^{3/2} sqrt(k+1))\n";
  os << "s2^{i,k} = " << strip_trailing_zeros(row.s2_base) << "/((i+1)(k+1)^{1/4})\n";
  os << "M = " << row.m << '\n';
  os << "q = " << row.q << '\n';
  return os.str();
}

void validate_config(const RunConfig& cfg) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config error: field \"" + field + "\" " + why);
  };

  if (cfg.problem != "sphere" && cfg.problem != "quadratic" && cfg.problem != "rosenbrock" &&
      cfg.problem != "abs-sum" && cfg.problem != "subprocess") {
    fail("problem", "must be one of sphere|quadratic|rosenbrock|abs-sum|subprocess");
  }
  if (cfg.n <= 0) fail("n", "must be a positive integer");
  if (cfg.problem == "subprocess" && cfg.subprocess_cmd.empty()) {
    fail("subprocess_cmd", "is required for subprocess problems");
  }
  if (cfg.noise != "none" && cfg.noise != "additive-gaussian" && cfg.noise != "additive-uniform" &&
      cfg.noise != "multiplicative-gaussian") {
    fail("noise", "must be none|additive-gaussian|additive-uniform|multiplicative-gaussian");
  }
  if (cfg.noise != "none" && !(cfg.noise_param >= 0.0)) {
    fail("noise_param", "must be >= 0");
  }
  if (cfg.bounded && !(cfg.bounds_lower < cfg.bounds_upper)) {
    fail("bounds_lower", "must be strictly below bounds_upper");
  }
  if (cfg.algorithm != "sso" && cfg.algorithm != "zos" && cfg.algorithm != "zo-sgd-baseline") {
    fail("algorithm", "must be one of sso|zos|zo-sgd-baseline");
  }
  if (!cfg.preset.empty() && !is_preset(cfg.preset)) {
    fail("preset", "must be one of solar|cifar10|imagenet");
  }
  if (!(cfg.beta0 > 0.0)) fail("beta0", "must be positive");
  if (cfg.schedule_mode == "default") {
    if (!(cfg.s1_00 > 0.0 && cfg.s1_00 < 1.0)) fail("s1_00", "must lie in (0,1)");
    if (!(cfg.s2_00 > 0.0 && cfg.s2_00 < 1.0)) fail("s2_00", "must lie in (0,1)");
    if (!(cfg.alpha2 > 0.0 && cfg.alpha2 < cfg.alpha1 && cfg.alpha1 < 1.0)) {
      fail("alpha1", "and alpha2 must satisfy 0 < alpha2 < alpha1 < 1");
    }
  } else if (cfg.schedule_mode == "convex") {
    if (!(cfg.rho > 0.0 && 2.0 * cfg.rho <= 1.0)) fail("rho", "must lie in (0, 0.5]");
  } else {
    fail("schedule_mode", "must be default|convex");
  }
  if (cfg.q < 1) fail("q", "must be >= 1");
  if (cfg.min_iters < 0) fail("min_iters", "must be >= 0");
  if (!(cfg.epsilon > 0.0)) fail("epsilon", "must be positive");
  if (cfg.algorithm == "zos" && !(cfg.tau > 0.0)) fail("tau", "must be positive");
  if (cfg.max_evals == 0) fail("max_evals", "must be positive");
  if (cfg.max_iters < 0) fail("max_iters", "must be >= 0 (0 means unlimited)");
  if (cfg.estimator != "gaussian" && cfg.estimator != "gaussian-truncated" &&
      cfg.estimator != "uniform-sphere") {
    fail("estimator", "must be gaussian|gaussian-truncated|uniform-sphere");
  }
  if (cfg.base_mode != "shared" && cfg.base_mode != "per-sample") {
    fail("base_mode", "must be shared|per-sample");
  }
  if (cfg.trace_stride < 1) fail("trace_stride", "must be >= 1");
  if (cfg.threads < 0) fail("threads", "must be >= 0");
  if (cfg.trace_path.empty()) fail("trace_path", "must not be empty");
  if (cfg.subprocess_timeout_ms <= 0) fail("subprocess_timeout_ms", "must be positive");
}

}  // namespace zo
