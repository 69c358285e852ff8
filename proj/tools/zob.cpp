// zob: zeroth-order blackbox optimization bench front end.
//
// Subcommands:
//   run          execute one seeded optimization run, write trace + summary
//   multi-seed   run several seeds and tabulate best-f mean/band per budget
//   verify       run the analysis verification suite (text + JSON report)
//   print-preset show one of the shipped hyperparameter presets

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "zo/config.hpp"
#include "zo/diagnostics.hpp"
#include "zo/runner.hpp"
#include "zo/trace.hpp"

namespace {

// Relative output paths land in $ZO_OUT_DIR when it is set.
std::string out_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("ZO_OUT_DIR");
  if (!dir || !*dir) return path;
  std::string d(dir);
  if (d.back() != '/') d.push_back('/');
  return d + path;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
  if (!os) throw std::runtime_error("failed writing output file: " + path);
}

// CLI flags mirror the config fields; explicit flags win over the file,
// which wins over the preset.
zo::RunConfig build_config(const std::string& config_path,
                           const std::map<std::string, std::string>& overrides) {
  zo::RunConfig cfg;
  if (!config_path.empty()) cfg = zo::parse_config_file(config_path);
  bool preset_changed = false;
  const auto p = overrides.find("preset");
  if (p != overrides.end() && !p->second.empty() && p->second != cfg.preset) {
    zo::apply_preset(cfg, p->second);
    preset_changed = true;
  }
  for (const auto& [key, value] : overrides) {
    if (key == "preset") continue;
    zo::set_config_field(cfg, key, value);
  }
  if (preset_changed) {
    zo::finalize_preset_defaults(cfg, overrides.count("search_budget") > 0);
  }
  return cfg;
}

void add_config_options(CLI::App* cmd, std::shared_ptr<std::map<std::string, std::string>> ov) {
  for (const auto& field : zo::config_fields()) {
    const std::string key = field.key;
    cmd->add_option_function<std::string>(
        "--" + key, [ov, key](const std::string& v) { (*ov)[key] = v; });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeroth-order stochastic optimization bench"};
  app.require_subcommand(1);

  std::string config_path;
  auto overrides = std::make_shared<std::map<std::string, std::string>>();

  auto* run_cmd = app.add_subcommand("run", "execute one optimization run");
  run_cmd->add_option("--config", config_path, "key = value config file");
  add_config_options(run_cmd, overrides);

  auto* multi_cmd = app.add_subcommand("multi-seed", "aggregate runs across seeds");
  int seed_count = 5;
  std::string table_path = "multi_seed.csv";
  multi_cmd->add_option("--config", config_path, "key = value config file");
  multi_cmd->add_option("--seeds", seed_count, "number of consecutive seeds");
  multi_cmd->add_option("--table", table_path, "aggregate table output path");
  add_config_options(multi_cmd, overrides);

  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  std::string json_path, text_path;
  std::uint64_t verify_seed = 0;
  verify_cmd->add_option("--json", json_path, "machine-readable report path");
  verify_cmd->add_option("--text", text_path, "human-readable report path");
  verify_cmd->add_option("--seed", verify_seed, "verification seed");

  auto* preset_cmd = app.add_subcommand("print-preset", "show a hyperparameter preset");
  std::string preset_name;
  preset_cmd->add_option("name", preset_name, "solar|cifar10|imagenet")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const zo::RunConfig cfg = build_config(config_path, *overrides);
      zo::validate_config(cfg);
      const zo::AlgorithmOutcome out = zo::execute_run(cfg);
      zo::write_trace_csv_file(out_path(cfg.trace_path), out.trace);
      const std::string summary = zo::render_summary(cfg, out);
      if (!cfg.summary_path.empty()) write_file(out_path(cfg.summary_path), summary);
      std::cout << summary;
      if (out.exit_reason == "oracle-error") {
        std::cerr << "evaluation failed: " << out.error_detail << '\n';
        return 3;
      }
      return 0;
    }

    if (multi_cmd->parsed()) {
      const zo::RunConfig cfg = build_config(config_path, *overrides);
      zo::validate_config(cfg);
      std::vector<zo::AlgorithmOutcome> outs;
      const auto rows = zo::run_multi_seed(cfg, seed_count, &outs);
      const std::string csv = zo::render_multi_seed_csv(rows);
      write_file(out_path(table_path), csv);
      double mean = 0.0;
      for (const auto& o : outs) mean += o.final_f_mean;
      mean /= static_cast<double>(outs.size());
      std::cout << "seeds = " << seed_count << " (base " << cfg.seed << ")\n"
                << "rows = " << rows.size() << '\n'
                << "mean_final_f = " << zo::format_g17(mean) << '\n'
                << "table = " << out_path(table_path) << '\n';
      return 0;
    }

    if (verify_cmd->parsed()) {
      const zo::VerificationReport rep = zo::run_verification(verify_seed);
      const std::string text = rep.to_text();
      std::cout << text;
      if (!text_path.empty()) write_file(out_path(text_path), text);
      if (!json_path.empty()) write_file(out_path(json_path), rep.to_json());
      return rep.all_pass() ? 0 : 1;
    }

    if (preset_cmd->parsed()) {
      std::cout << zo::print_preset(preset_name);
      return 0;
    }
  } catch (const zo::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
