#ifndef REDLINE_HARNESS_HPP_
#define REDLINE_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "redline/agents.hpp"
#include "redline/env.hpp"
#include "redline/ppo.hpp"

namespace redline {

// One experiment grid: every (size, reward, order, space) cell is trained
// once per seed. Defaults reproduce the full study grid (1500 runs).
struct SweepSpec {
  std::vector<int> network_sizes = {2, 5, 10, 20, 50};
  std::vector<RewardFunctionKind> reward_functions = {
      RewardFunctionKind::SparsePositive, RewardFunctionKind::SparseNegative,
      RewardFunctionKind::Dense};
  std::vector<AgentOrder> agent_orders = {AgentOrder::RedThenBlue,
                                          AgentOrder::BlueThenRed};
  std::vector<ActionSpace> action_spaces = {ActionSpace::Basic,
                                            ActionSpace::Extended};
  std::vector<std::uint64_t> seeds;  // defaults to 0..24 via validate_spec
  int eval_episodes = 1000;
  int parallel_workers = 1;
  std::string out_dir = "records";
  int dv_window = 30;

  // Base configs; per-run fields (num_nodes, reward_function, agent_order,
  // action_space, rng_seed / seed, total_timesteps) are overridden per cell.
  EnvConfig env;
  PpoConfig ppo;
  // When unset, each size uses its default budget (see default_timesteps).
  std::optional<std::int64_t> timesteps_override;
};

// Default per-size training budget.
std::int64_t default_timesteps(int num_nodes);

// Fills defaulted seeds, then checks: non-empty sequences, pairwise distinct
// seeds, eval_episodes >= 1, parallel_workers >= 1. Throws ConfigError.
void validate_spec(SweepSpec& spec);

// Key-value sweep file; unknown keys are rejected. See docs/formats.md.
SweepSpec load_sweep_spec(const std::string& path);
SweepSpec sweep_spec_from_text(const std::string& text);

enum class RunStatus { Completed, Diverged };

std::string to_string(RunStatus status);
RunStatus parse_run_status(const std::string& name);

// One (config, seed) training run, as persisted to its record file.
struct RunRecord {
  EnvConfig env;           // rng_seed = the run seed
  PpoConfig ppo;           // seed = the run seed
  int eval_episodes = 0;
  std::uint64_t seed = 0;
  TrainingCurve curve;
  EvaluationSummary evaluation;  // meaningful only when Completed
  double duration_seconds = 0.0;
  RunStatus status = RunStatus::Completed;
  std::string config_hash;
};

// FNV-1a over the canonical config text (env, ppo, eval_episodes); the
// resume check compares this against the persisted record.
std::string run_config_hash(const RunRecord& record);

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

// Record file path inside out_dir: <cell>/seed_<seed>.json with the cell
// directory named n<size>_<reward>_<order>_<space>.
std::string record_path(const std::string& out_dir, const RunRecord& record);

struct SweepResult {
  std::vector<RunRecord> records;  // canonical grid order
  int executed = 0;
  int skipped = 0;
};

// Runs every cell x seed over a fixed pool of parallel_workers threads,
// persisting each record on completion (write to temp, then rename). A run
// whose record file already exists with a matching config hash is skipped,
// so an interrupted sweep resumes where it stopped; a hash mismatch is a
// ConfigError. Diverged runs are recorded, not fatal. Results are returned
// in grid order regardless of scheduling.
SweepResult run_sweep(const SweepSpec& spec);

struct CellKey {
  int num_nodes = 0;
  RewardFunctionKind reward{};
  AgentOrder order{};
  ActionSpace space{};
};

bool operator==(const CellKey& a, const CellKey& b);
bool operator<(const CellKey& a, const CellKey& b);

// Cross-seed aggregate for one grid cell.
struct CellSummary {
  CellKey key;
  int n_seeds = 0;    // completed runs
  int n_diverged = 0;
  double eval_score_mean = 0.0;  // mean over seeds of per-run eval means
  double eval_score_se = 0.0;
  double episodic_reward_mean = 0.0;
  double dv = 0.0;  // dispersion variability of the mean ground-truth curve
  int dv_window = 0;
  std::vector<std::int64_t> curve_timesteps;
  std::vector<double> mean_episodic_reward;  // pointwise mean across seeds
  std::vector<double> mean_ground_truth;
};

// Groups records by cell, averages evaluation scores across seeds, builds
// pointwise-mean curves (diverged runs excluded and counted), and computes
// each cell's dispersion variability. Order of records does not matter;
// output is sorted by key. Throws MixedConfig when records within a cell
// disagree on anything but their seed.
std::vector<CellSummary> aggregate(const std::vector<RunRecord>& records,
                                   int dv_window = 30);

// Loads every *.json record under dir (recursively). Throws IoError.
std::vector<RunRecord> load_records(const std::string& dir);

enum class ReportFormat { Csv, MarkdownTable, PlotData };

ReportFormat parse_report_format(const std::string& name);

// csv: one row per cell, columns size, reward, order, space, n_seeds,
//      n_diverged, eval_score_mean, eval_score_se, dv, window.
// markdown-table: one table per action space; agent orders as row groups,
//      network sizes as rows, and per-reward Eval Score / DV (e-3) columns.
// plot-data: per-cell file of "timesteps mean_episodic_reward
//      mean_ground_truth_score" lines.
// Empty summaries are an InvalidConfig; file failures are IoError.
void export_csv(const std::vector<CellSummary>& summaries, std::ostream& out);
void export_markdown_table(const std::vector<CellSummary>& summaries,
                           std::ostream& out);
void export_report(const std::vector<CellSummary>& summaries,
                   ReportFormat format, const std::string& out_path);

// Runs a scripted baseline policy for whole episodes and summarizes like
// evaluate_policy. trace_out, when non-null, receives every step trace.
EvaluationSummary run_oracle_episodes(OraclePolicyKind kind,
                                      const EnvConfig& env_config,
                                      int episodes,
                                      std::ostream* trace_out = nullptr);

}  // namespace redline

#endif  // REDLINE_HARNESS_HPP_
