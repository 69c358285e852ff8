#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace zo {

// Flat run description; round-trips losslessly through the key=value file
// format. Field names double as config keys and CLI flags.
struct RunConfig {
  // problem
  std::string problem = "sphere";  // sphere|quadratic|rosenbrock|abs-sum|subprocess
  std::int64_t n = 0;
  std::string noise = "none";
  double noise_param = 0.0;
  std::string subprocess_cmd;
  std::int64_t subprocess_timeout_ms = 10000;
  double bounds_lower = 0.0;
  double bounds_upper = 0.0;
  bool bounded = false;

  // algorithm + schedules
  std::string algorithm = "sso";  // sso|zos|zo-sgd-baseline
  std::string preset;             // ""|solar|cifar10|imagenet
  double beta0 = 0.1;
  double s1_00 = 0.1;
  double s2_00 = 0.5;
  double alpha1 = 0.5;
  double alpha2 = 0.25;
  std::int64_t q = 10;
  std::int64_t min_iters = 5;          // M
  std::uint64_t search_budget = 0;     // N
  double epsilon = 1e-3;
  double tau = 1e-3;                   // standalone zos threshold
  std::uint64_t max_evals = 100000;
  std::int64_t max_iters = 0;          // 0 = unlimited
  std::string estimator = "gaussian";  // gaussian|gaussian-truncated|uniform-sphere
  std::string base_mode = "shared";    // shared|per-sample
  std::string schedule_mode = "default";  // default|convex
  double rho = 0.25;

  // run control
  std::uint64_t seed = 0;
  std::string trace_path = "trace.csv";
  std::string summary_path;
  std::int64_t trace_stride = 1;
  bool timing = false;
  std::int64_t threads = 0;

  bool operator==(const RunConfig&) const = default;
};

using ConfigMember = std::variant<std::string RunConfig::*, double RunConfig::*,
                                  std::int64_t RunConfig::*, std::uint64_t RunConfig::*,
                                  bool RunConfig::*>;

struct ConfigField {
  std::string key;
  ConfigMember member;
};

// Every config key, in serialization order.
const std::vector<ConfigField>& config_fields();

// Thrown with a message naming the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void set_config_field(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_field(const RunConfig& cfg, const std::string& key);

// key = value lines; '#' starts a comment. Unknown keys are errors. A preset
// named in the file is applied first, then the file's explicit keys.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// Table-backed hyperparameter presets: solar, cifar10, imagenet.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
void apply_preset(RunConfig& cfg, const std::string& name);
// When a preset is active and the user gave no explicit search budget, the
// search step turns on for n <= 20.
void finalize_preset_defaults(RunConfig& cfg, bool user_set_search_budget);
std::string print_preset(const std::string& name);

// Cross-field validation; throws ConfigError naming the field.
void validate_config(const RunConfig& cfg);

}  // namespace zo
