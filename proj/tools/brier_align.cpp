#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brier/experiment.hpp"

namespace {

int env_jobs() {
  const char* v = std::getenv("BRIER_ALIGN_JOBS");
  if (!v) return 1;
  const int j = std::atoi(v);
  return j >= 1 ? j : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brier-align: finite-instance preference alignment experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int seeds_override = -1;
  long long master_seed_override = -1;
  int jobs = env_jobs();
  long budget = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seeds", seeds_override, "override the seed count");
    cmd->add_option("--master-seed", master_seed_override, "override the master seed");
    cmd->add_option("--jobs", jobs, "worker threads (default $BRIER_ALIGN_JOBS or 1)");
    cmd->add_option("--budget", budget, "refuse to run more than this many cells (0 = no cap)");
  };

  CLI::App* run = app.add_subcommand("run", "run the config as written");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "run the config's sweep axes");
  add_common(sweep);

  CLI::App* report = app.add_subcommand("report", "aggregate records CSVs");
  std::vector<std::string> csvs;
  std::string report_out = ".";
  report->add_option("csv", csvs, "records.csv files")->required();
  report->add_option("--out", report_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return brier::cmd_report(csvs, report_out);

    brier::ExperimentConfig cfg = brier::load_config(config_path);
    if (seeds_override >= 1) cfg.seeds = seeds_override;
    if (master_seed_override >= 0)
      cfg.master_seed = static_cast<std::uint64_t>(master_seed_override);
    if (run->parsed() && (!cfg.epsilon_axis.empty() || !cfg.alpha_axis.empty()))
      throw std::invalid_argument("config.sweep: present but the run verb was given; use sweep");
    cfg.validate();
    return brier::cmd_run(cfg, out_dir, jobs, budget);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
