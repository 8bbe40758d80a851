// Command-line driver: run / sweep / oracle subcommands over a JSON config.
// Exit codes: 0 converged, 2 budget exhausted, 3 aborted, 4 I/O failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motsim/run.hpp"

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (flag_value == 0) {
    if (const char* env = std::getenv("MOTILITY_SIM_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
  }
  return 1;
}

bool load_config(const std::string& path, motsim::RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config: " << path << "\n";
    return false;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  motsim::ConfigParseResult parsed = motsim::parse_config(buf.str());
  if (!parsed.ok()) {
    std::cerr << "config errors in " << path << ":\n";
    for (const auto& e : parsed.errors) std::cerr << "  - " << e << "\n";
    return false;
  }
  cfg = *parsed.config;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume simulator for a chemotaxis-consumption system "
               "with signal-suppressed motility"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads for sweeps (0 = MOTILITY_SIM_THREADS or 1)");

  std::string config_path;
  std::string out_dir;
  std::vector<double> d_values;

  // fallthrough lets the global --threads flag appear after the subcommand
  CLI::App* run = app.add_subcommand("run", "execute one configured run");
  run->fallthrough();
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "run the config across D values");
  sweep->fallthrough();
  sweep->add_option("--config", config_path, "JSON config path")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--d-values", d_values, "comma-separated signal diffusivities")
      ->required()
      ->delimiter(',');

  CLI::App* oracle = app.add_subcommand(
      "oracle", "print the homogeneous ODE trajectory for the config as CSV");
  oracle->fallthrough();
  oracle->add_option("--config", config_path, "JSON config path")->required();

  CLI11_PARSE(app, argc, argv);

  motsim::RunConfig cfg;
  if (!load_config(config_path, cfg)) return motsim::kExitAborted;
  std::string out = !out_dir.empty() ? out_dir
                    : !cfg.output_dir.empty() ? cfg.output_dir
                                              : std::string(".");

  if (run->parsed()) return motsim::run_command(cfg, out);
  if (sweep->parsed()) {
    std::sort(d_values.begin(), d_values.end());
    return motsim::sweep_command(cfg, d_values, out, resolve_threads(threads)).exit_code;
  }
  if (oracle->parsed()) return motsim::oracle_command(cfg, std::cout);
  return motsim::kExitAborted;
}
