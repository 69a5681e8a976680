#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "redline/errors.hpp"
#include "redline/harness.hpp"
#include "redline/kernels.hpp"

namespace {

using namespace redline;

kernels::Backend parse_backend(const std::string& name) {
  if (name == "auto") return kernels::Backend::Auto;
  if (name == "scalar") return kernels::Backend::Scalar;
  if (name == "avx2") return kernels::Backend::Avx2;
  throw ConfigError("unknown backend: " + name);
}

void print_evaluation(const EvaluationSummary& summary) {
  std::printf("episodes                %d\n", summary.episodes);
  std::printf("ground_truth_mean       %.6f\n", summary.ground_truth_mean);
  std::printf("ground_truth_se         %.6f\n", summary.ground_truth_se);
  std::printf("episodic_reward_mean    %.6f\n", summary.episodic_reward_mean);
  std::printf("episodic_reward_se      %.6f\n", summary.episodic_reward_se);
}

int cmd_train(const EnvConfig& env, PpoConfig ppo,
              std::optional<std::int64_t> timesteps, int eval_episodes,
              const std::string& out_path) {
  if (timesteps) {
    ppo.total_timesteps = *timesteps;
  } else {
    ppo.total_timesteps = default_timesteps(env.num_nodes);
  }
  std::printf("training: nodes=%d reward=%s order=%s space=%s seed=%llu "
              "timesteps=%lld\n",
              env.num_nodes, to_string(env.reward_function).c_str(),
              to_string(env.agent_order).c_str(),
              to_string(env.action_space).c_str(),
              static_cast<unsigned long long>(ppo.seed),
              static_cast<long long>(ppo.total_timesteps));
  TrainResult result =
      train(env, ppo, [](std::int64_t t, double reward, double score) {
        std::printf("  t=%-10lld mean_episodic_reward=%-12.4f "
                    "mean_ground_truth=%.4f\n",
                    static_cast<long long>(t), reward, score);
        std::fflush(stdout);
      });
  std::printf("evaluating final policy over %d episodes\n", eval_episodes);
  const EvaluationSummary summary =
      evaluate_policy(result.params, env, eval_episodes, true);
  print_evaluation(summary);
  if (!out_path.empty()) {
    save_checkpoint(out_path, result.params, env);
    std::printf("checkpoint written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, int episodes,
                 bool deterministic, std::optional<std::uint64_t> seed) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (seed) ckpt.env_config.rng_seed = *seed;
  const EvaluationSummary summary =
      evaluate_policy(ckpt.params, ckpt.env_config, episodes, deterministic);
  print_evaluation(summary);
  return 0;
}

int cmd_sweep(const std::string& spec_path, std::optional<int> workers,
              bool resume) {
  SweepSpec spec = load_sweep_spec(spec_path);
  if (workers) spec.parallel_workers = *workers;
  if (!resume && std::filesystem::exists(spec.out_dir)) {
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(spec.out_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        throw ConfigError("out_dir " + spec.out_dir +
                          " already holds records; pass --resume to continue "
                          "an interrupted sweep or point out_dir elsewhere");
      }
    }
  }
  const SweepResult result = run_sweep(spec);
  int diverged = 0;
  for (const RunRecord& record : result.records) {
    if (record.status == RunStatus::Diverged) ++diverged;
  }
  std::printf("sweep done: %zu runs (%d executed, %d resumed, %d diverged)\n",
              result.records.size(), result.executed, result.skipped,
              diverged);
  std::printf("records in %s\n", spec.out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& records_dir, const std::string& format_name,
               std::string out_path, int window) {
  const ReportFormat format = parse_report_format(format_name);
  if (out_path.empty()) {
    switch (format) {
      case ReportFormat::Csv: out_path = "report.csv"; break;
      case ReportFormat::MarkdownTable: out_path = "report.md"; break;
      case ReportFormat::PlotData: out_path = "plot-data"; break;
    }
  }
  const std::vector<RunRecord> records = load_records(records_dir);
  const std::vector<CellSummary> summaries = aggregate(records, window);
  export_report(summaries, format, out_path);
  std::printf("report written to %s\n", out_path.c_str());
  return 0;
}

int cmd_oracle(const std::string& policy_name, const EnvConfig& env,
               int episodes, const std::string& trace_path) {
  const OraclePolicyKind kind = parse_oracle_kind(policy_name);
  std::ofstream trace_file;
  std::ostream* trace_out = nullptr;
  if (!trace_path.empty()) {
    trace_file.open(trace_path, std::ios::trunc);
    if (!trace_file) throw IoError("cannot write trace: " + trace_path);
    trace_out = &trace_file;
  }
  const EvaluationSummary summary =
      run_oracle_episodes(kind, env, episodes, trace_out);
  std::printf("policy                  %s\n", to_string(kind).c_str());
  print_evaluation(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyber-defence RL study kit: train, sweep, and report"};
  app.require_subcommand(1);

  std::string backend = "auto";
  app.add_option("--backend", backend,
                 "Math kernel backend: auto, scalar, avx2")
      ->capture_default_str();

  EnvConfig env;
  PpoConfig ppo;
  std::string reward_name = "sparse-positive";
  std::string order_name = "red-then-blue";
  std::string space_name = "basic";

  auto add_env_flags = [&](CLI::App* cmd) {
    cmd->add_option("--nodes", env.num_nodes, "Network size (chain length)")
        ->capture_default_str();
    cmd->add_option("--reward", reward_name,
                    "sparse-positive, sparse-negative, or dense")
        ->capture_default_str();
    cmd->add_option("--order", order_name, "red-then-blue or blue-then-red")
        ->capture_default_str();
    cmd->add_option("--action-space", space_name, "basic or extended")
        ->capture_default_str();
    cmd->add_option("--episode-length", env.episode_length, "Steps per episode")
        ->capture_default_str();
    cmd->add_option("--attack-prob", env.red_attack_prob,
                    "Red attack probability per step")
        ->capture_default_str();
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one PPO agent");
  add_env_flags(train_cmd);
  std::uint64_t seed = 0;
  train_cmd->add_option("--seed", seed, "Run seed")->capture_default_str();
  std::optional<std::int64_t> timesteps;
  train_cmd->add_option("--timesteps", timesteps,
                        "Training budget (default depends on --nodes)");
  train_cmd->add_option("--eval-interval", ppo.eval_interval,
                        "Timesteps between curve points")
      ->capture_default_str();
  int eval_episodes = 1000;
  train_cmd->add_option("--eval-episodes", eval_episodes,
                        "Final evaluation episode count")
      ->capture_default_str();
  std::string out_path;
  train_cmd->add_option("--out", out_path, "Checkpoint output path");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  std::string checkpoint_path;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  int episodes = 1000;
  eval_cmd->add_option("--episodes", episodes, "Episode count")
      ->capture_default_str();
  bool deterministic = true;
  eval_cmd->add_flag("--deterministic,!--stochastic", deterministic,
                     "Greedy (argmax) actions; --stochastic samples instead");
  std::optional<std::uint64_t> eval_seed;
  eval_cmd->add_option("--seed", eval_seed,
                       "Override the checkpoint's evaluation seed");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid");
  std::string spec_path;
  sweep_cmd->add_option("--spec", spec_path, "Sweep spec file")->required();
  std::optional<int> workers;
  sweep_cmd->add_option("--workers", workers, "Parallel worker override");
  bool resume = false;
  sweep_cmd->add_flag("--resume", resume,
                      "Reuse records already present in out_dir");

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate records");
  std::string records_dir;
  report_cmd->add_option("--records", records_dir, "Record directory")
      ->required();
  std::string format_name = "csv";
  report_cmd->add_option("--format", format_name,
                         "csv, markdown-table, or plot-data")
      ->capture_default_str();
  std::string report_out;
  report_cmd->add_option("--out", report_out, "Output file or directory");
  int window = 30;
  report_cmd->add_option("--window", window, "Dispersion variability window")
      ->capture_default_str();

  // oracle
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Score a scripted baseline policy");
  std::string policy_name;
  oracle_cmd
      ->add_option("--policy", policy_name,
                   "restore-entry, decoy-entry, greedy-restore-deepest, "
                   "or noop")
      ->required();
  add_env_flags(oracle_cmd);
  int oracle_episodes = 1000;
  oracle_cmd->add_option("--episodes", oracle_episodes, "Episode count")
      ->capture_default_str();
  std::uint64_t oracle_seed = 0;
  oracle_cmd->add_option("--seed", oracle_seed, "Environment seed")
      ->capture_default_str();
  std::string trace_path;
  oracle_cmd->add_option("--trace", trace_path,
                         "Write per-step action traces to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    kernels::force_backend(parse_backend(backend));
    env.reward_function = parse_reward_kind(reward_name);
    env.agent_order = parse_agent_order(order_name);
    env.action_space = parse_action_space(space_name);

    if (train_cmd->parsed()) {
      env.rng_seed = seed;
      ppo.seed = seed;
      return cmd_train(env, ppo, timesteps, eval_episodes, out_path);
    }
    if (eval_cmd->parsed()) {
      return cmd_evaluate(checkpoint_path, episodes, deterministic, eval_seed);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(spec_path, workers, resume);
    }
    if (report_cmd->parsed()) {
      return cmd_report(records_dir, format_name, report_out, window);
    }
    if (oracle_cmd->parsed()) {
      env.rng_seed = oracle_seed;
      return cmd_oracle(policy_name, env, oracle_episodes, trace_path);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
