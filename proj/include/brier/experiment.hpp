#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brier/domain.hpp"
#include "brier/mechanisms.hpp"

namespace brier {

enum class Algorithm { SquareChiPO, LogChiPO, DPO, CdpSample, SelfPlay, RegressionLab };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct BetaSpec {
  enum class Mode { Oracle, Fixed, Grid };
  Mode mode = Mode::Fixed;
  double value = 0.25;
  std::vector<double> grid;
};

struct InstanceSpec {
  enum class Source { Preset, File, Generate };
  Source source = Source::Preset;
  std::string preset = "reference_bt";  // reference_bt | selfplay_2x2 | regression_lab
  std::string path;
  std::string mode = "bt";  // generate: bt | general
  int num_contexts = 3, num_actions = 3;
  double r_max = 1.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  int schema_version = 1;
  InstanceSpec instance;
  std::vector<Algorithm> algorithms;
  std::string setting_kind = "clean";
  double epsilon = kInfEps;
  double alpha = 0.0;
  Adversary adversary;
  std::vector<double> epsilon_axis, alpha_axis;  // optional sweep axes
  BetaSpec beta;
  std::vector<long> n_grid;
  long m = 0;
  int T = 0;
  int num_distractors = 15;
  int seeds = 1;
  std::uint64_t master_seed = 1;
  double zeta = 0.05;
  std::string out_dir;

  void validate() const;  // throws std::invalid_argument with a field path
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// One experiment outcome row. NaN marks fields that do not apply to the
// algorithm that produced the row; they serialize as empty CSV cells.
struct RunRecord {
  std::string setting;
  double epsilon = kInfEps;
  double alpha = 0.0;
  long n = 0;
  long m = -1;
  int T = -1;
  long seed = 0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  int chosen_index = -1;
  double sg = std::numeric_limits<double>::quiet_NaN();
  double dg = std::numeric_limits<double>::quiet_NaN();
  double err_stat = std::numeric_limits<double>::quiet_NaN();
  double err2_gen = std::numeric_limits<double>::quiet_NaN();
  double c_star = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;  // sidecar timings file only, never the main CSV
  std::string algorithm;
};

struct CellSpec {
  Algorithm algorithm = Algorithm::SquareChiPO;
  PipelineSetting setting;
  std::optional<double> fixed_beta;  // grid/fixed modes pin it; oracle derives it
  long n = 0;
  long seed = 0;
};

std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg);

RunRecord run_cell(const ExperimentConfig& cfg, const AlignmentInstance& inst,
                   const CellSpec& cell);

AlignmentInstance build_instance(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<std::string> failures;  // per-cell error messages
};

// Work-pool execution; records come back sorted deterministically regardless
// of the number of jobs.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs);

// Locale-independent serialization, LF endings, %.17g doubles.
std::string records_to_csv(const std::vector<RunRecord>& records);
std::string timings_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_records_csv(const std::string& text);

std::string summary_json(const std::vector<RunRecord>& records, double zeta);
std::string render_svg(const std::vector<RunRecord>& records);

// Returns a process exit code: 0 ok, 3 budget refusal, 4 partial-cell failure.
int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, int jobs, long budget);
int cmd_report(const std::vector<std::string>& csv_paths, const std::string& out_dir);

}  // namespace brier
