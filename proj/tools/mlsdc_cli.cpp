// Command-line front end: list / describe / run convergence-study presets.

#include "mlsdc/cli/config.hpp"
#include "mlsdc/cli/presets.hpp"
#include "mlsdc/cli/report.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mlsdc::cli;

std::string params_of(const StudyConfig& c) {
  std::ostringstream os;
  if (c.problem.id == "heat1d") os << "nu=" << c.problem.nu << " kappa=" << c.problem.kappa;
  if (c.problem.id == "allencahn2d") os << "eps=" << c.problem.eps << " kappa=" << c.problem.kappa;
  if (c.problem.id == "auzinger") os << "lambda=" << c.problem.lambda << " rho=" << c.problem.rho;
  os << " M=" << c.M;
  if (c.is_mlsdc()) {
    os << "/" << c.M_H;
    if (c.N_h != c.N_H) os << " N=" << c.N_h << "/" << c.N_H << " p=" << c.p;
  } else if (c.N_h > 0) {
    os << " N=" << c.N_h;
  }
  os << " dt=" << c.dt.front() << ".." << c.dt.back();
  return os.str();
}

std::string expected_of(const StudyConfig& c) {
  std::string s;
  for (const auto& ch : c.checks) s += (s.empty() ? "" : "; ") + ch.describe();
  return s;
}

std::vector<double> parse_dt_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--dt-list: cannot parse '" + item + "'");
    }
  }
  return out;
}

void print_results(const StudyConfig& cfg, const RunOutcome& o) {
  const auto& r = o.result;
  std::cout << cfg.name << " (" << cfg.method << "): fitted slopes per iteration\n";
  std::cout << "  k   order   contraction\n";
  for (std::size_t k = 0; k < r.order.size(); ++k) {
    std::cout << "  " << std::setw(2) << k << "  " << std::setw(6) << std::fixed
              << std::setprecision(3) << r.order[k] << "  " << std::setw(8) << r.contraction[k]
              << '\n';
  }
  std::cout.unsetf(std::ios::fixed);
  for (const auto& c : o.checks)
    std::cout << (c.pass ? "  PASS  " : "  FAIL  ") << c.check.describe() << "  (measured "
              << c.value << ")\n";
  for (const auto& n : r.notes) std::cout << "  note: " << n << '\n';
  std::cout << "  wrote " << o.csv_path.string() << ", " << o.summary_path.string();
  if (!o.plot_path.empty()) std::cout << ", " << o.plot_path.string();
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDC / MLSDC convergence studies"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "List the study presets");

  std::string describe_name;
  auto* describe_cmd = app.add_subcommand("describe", "Print a preset's full configuration");
  describe_cmd->add_option("preset", describe_name, "Preset name")->required();

  std::string run_preset, config_path, out_dir, dt_list;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool plot = true, no_timing = false;
  auto* run_cmd = app.add_subcommand("run", "Run a preset or a config file");
  run_cmd->add_option("preset", run_preset, "Preset name");
  run_cmd->add_option("--config", config_path, "JSON study configuration")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory (default: $MLSDC_OUT_DIR or ./mlsdc-out)");
  run_cmd->add_option("--jobs", jobs, "Worker threads for independent dt cells")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Seed for the random initial guess");
  run_cmd->add_flag("--plot,!--no-plot", plot, "Write a matplotlib script next to the results");
  run_cmd->add_option("--dt-list", dt_list, "Comma separated step sizes, decreasing");
  run_cmd->add_flag("--no-timing", no_timing, "Write 0 in the wall_ms column (byte-stable output)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      std::cout << std::left << std::setw(24) << "preset" << std::setw(5) << "fig" << std::setw(7)
                << "method" << "parameters | expected | note\n";
      for (const auto& [name, c] : presets()) {
        std::cout << std::setw(24) << name << std::setw(5) << c.figure << std::setw(7) << c.method
                  << params_of(c) << " | " << expected_of(c) << " | " << c.note << '\n';
      }
      return 0;
    }
    if (describe_cmd->parsed()) {
      const StudyConfig& c = find_preset(describe_name);
      std::cout << c.name << ": " << c.note << '\n'
                << "expected: " << expected_of(c) << '\n'
                << to_json(c).dump(2) << '\n';
      return 0;
    }

    if (run_preset.empty() == config_path.empty()) {
      std::cerr << "run: give exactly one of <preset> or --config <path>\n";
      return 2;
    }
    StudyConfig cfg = config_path.empty() ? find_preset(run_preset) : parse_config_file(config_path);
    if (seed) cfg.seed = *seed;
    if (!dt_list.empty()) cfg.dt = parse_dt_list(dt_list);
    if (no_timing) cfg.timing = false;
    cfg.validate();

    RunOptions opt;
    if (!out_dir.empty()) {
      opt.out_dir = out_dir;
    } else if (const char* env = std::getenv("MLSDC_OUT_DIR"); env && *env) {
      opt.out_dir = env;
    }
    opt.jobs = jobs;
    opt.plot = plot;
    const RunOutcome o = run_and_write(cfg, opt);
    print_results(cfg, o);
    return o.all_pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
