#include "redline/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "redline/errors.hpp"
#include "redline/kvconfig.hpp"
#include "redline/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace redline {

std::int64_t default_timesteps(int num_nodes) {
  if (num_nodes <= 5) return 1'000'000;
  if (num_nodes <= 10) return 1'500'000;
  if (num_nodes <= 20) return 2'000'000;
  return 2'500'000;
}

void validate_spec(SweepSpec& spec) {
  if (spec.seeds.empty()) {
    spec.seeds.resize(25);
    std::iota(spec.seeds.begin(), spec.seeds.end(), std::uint64_t{0});
  }
  if (spec.network_sizes.empty()) throw ConfigError("network_sizes is empty");
  if (spec.reward_functions.empty()) {
    throw ConfigError("reward_functions is empty");
  }
  if (spec.agent_orders.empty()) throw ConfigError("agent_orders is empty");
  if (spec.action_spaces.empty()) throw ConfigError("action_spaces is empty");
  std::set<std::uint64_t> distinct(spec.seeds.begin(), spec.seeds.end());
  if (distinct.size() != spec.seeds.size()) {
    throw ConfigError("seeds must be pairwise distinct");
  }
  if (spec.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (spec.parallel_workers < 1) {
    throw ConfigError("parallel_workers must be >= 1");
  }
  if (spec.dv_window < 2) throw ConfigError("dv_window must be >= 2");
  if (spec.out_dir.empty()) throw ConfigError("out_dir is empty");
  for (int n : spec.network_sizes) {
    if (n < 2) throw ConfigError("network sizes must be >= 2");
  }
}

namespace {

const std::vector<std::string> kSweepKeys = {
    "network_sizes",   "reward_functions", "agent_orders",
    "action_spaces",   "seeds",            "first_seed",
    "seed_count",      "eval_episodes",    "parallel_workers",
    "out_dir",         "dv_window",        "env.entry_node",
    "env.episode_length", "env.red_attack_prob", "env.detection_prob",
    "env.decoy_lifetime", "env.red_target_mode", "ppo.gamma",
    "ppo.gae_lambda",  "ppo.clip_epsilon", "ppo.learning_rate",
    "ppo.rollout_horizon", "ppo.update_epochs", "ppo.minibatch_size",
    "ppo.entropy_coef", "ppo.value_coef",  "ppo.hidden_layers",
    "ppo.total_timesteps", "ppo.eval_interval"};

SweepSpec spec_from_kv(const KvConfig& kv) {
  kv.require_known(kSweepKeys);
  SweepSpec spec;

  if (kv.has("network_sizes")) {
    spec.network_sizes.clear();
    for (std::int64_t n : kv.get_int_list("network_sizes")) {
      spec.network_sizes.push_back(static_cast<int>(n));
    }
  }
  if (kv.has("reward_functions")) {
    spec.reward_functions.clear();
    for (const std::string& name : kv.get_list("reward_functions")) {
      spec.reward_functions.push_back(parse_reward_kind(name));
    }
  }
  if (kv.has("agent_orders")) {
    spec.agent_orders.clear();
    for (const std::string& name : kv.get_list("agent_orders")) {
      spec.agent_orders.push_back(parse_agent_order(name));
    }
  }
  if (kv.has("action_spaces")) {
    spec.action_spaces.clear();
    for (const std::string& name : kv.get_list("action_spaces")) {
      spec.action_spaces.push_back(parse_action_space(name));
    }
  }
  if (kv.has("seeds")) {
    for (std::int64_t s : kv.get_int_list("seeds")) {
      spec.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (kv.has("seed_count") || kv.has("first_seed")) {
    const std::int64_t count = kv.get_int("seed_count", 25);
    const std::uint64_t first = kv.get_uint("first_seed", 0);
    if (count < 1) throw ConfigError("seed_count must be >= 1");
    for (std::int64_t i = 0; i < count; ++i) {
      spec.seeds.push_back(first + static_cast<std::uint64_t>(i));
    }
  }
  spec.eval_episodes =
      static_cast<int>(kv.get_int("eval_episodes", spec.eval_episodes));
  spec.parallel_workers =
      static_cast<int>(kv.get_int("parallel_workers", spec.parallel_workers));
  spec.out_dir = kv.get_string("out_dir", spec.out_dir);
  spec.dv_window = static_cast<int>(kv.get_int("dv_window", spec.dv_window));

  spec.env.entry_node =
      static_cast<int>(kv.get_int("env.entry_node", spec.env.entry_node));
  spec.env.episode_length = static_cast<int>(
      kv.get_int("env.episode_length", spec.env.episode_length));
  spec.env.red_attack_prob =
      kv.get_double("env.red_attack_prob", spec.env.red_attack_prob);
  spec.env.detection_prob =
      kv.get_double("env.detection_prob", spec.env.detection_prob);
  if (kv.has("env.decoy_lifetime")) {
    spec.env.decoy_lifetime =
        parse_decoy_lifetime(kv.get_string("env.decoy_lifetime"));
  }
  if (kv.has("env.red_target_mode")) {
    spec.env.red_target_mode =
        parse_red_target_mode(kv.get_string("env.red_target_mode"));
  }

  spec.ppo.gamma = kv.get_double("ppo.gamma", spec.ppo.gamma);
  spec.ppo.gae_lambda = kv.get_double("ppo.gae_lambda", spec.ppo.gae_lambda);
  spec.ppo.clip_epsilon =
      kv.get_double("ppo.clip_epsilon", spec.ppo.clip_epsilon);
  spec.ppo.learning_rate =
      kv.get_double("ppo.learning_rate", spec.ppo.learning_rate);
  spec.ppo.rollout_horizon = static_cast<int>(
      kv.get_int("ppo.rollout_horizon", spec.ppo.rollout_horizon));
  spec.ppo.update_epochs = static_cast<int>(
      kv.get_int("ppo.update_epochs", spec.ppo.update_epochs));
  spec.ppo.minibatch_size = static_cast<int>(
      kv.get_int("ppo.minibatch_size", spec.ppo.minibatch_size));
  spec.ppo.entropy_coef =
      kv.get_double("ppo.entropy_coef", spec.ppo.entropy_coef);
  spec.ppo.value_coef = kv.get_double("ppo.value_coef", spec.ppo.value_coef);
  if (kv.has("ppo.hidden_layers")) {
    spec.ppo.hidden_layers.clear();
    for (std::int64_t w : kv.get_int_list("ppo.hidden_layers")) {
      spec.ppo.hidden_layers.push_back(static_cast<int>(w));
    }
  }
  if (kv.has("ppo.total_timesteps")) {
    spec.timesteps_override = kv.get_int("ppo.total_timesteps");
  }
  spec.ppo.eval_interval =
      kv.get_int("ppo.eval_interval", spec.ppo.eval_interval);

  validate_spec(spec);
  return spec;
}

}  // namespace

SweepSpec load_sweep_spec(const std::string& path) {
  return spec_from_kv(KvConfig::from_file(path));
}

SweepSpec sweep_spec_from_text(const std::string& text) {
  return spec_from_kv(KvConfig::from_text(text));
}

std::string to_string(RunStatus status) {
  return status == RunStatus::Completed ? "completed" : "diverged";
}

RunStatus parse_run_status(const std::string& name) {
  if (name == "completed") return RunStatus::Completed;
  if (name == "diverged") return RunStatus::Diverged;
  throw ConfigError("unknown run status: " + name);
}

namespace {

std::string ppo_config_to_text(const PpoConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "gamma = " << config.gamma << '\n'
      << "gae_lambda = " << config.gae_lambda << '\n'
      << "clip_epsilon = " << config.clip_epsilon << '\n'
      << "learning_rate = " << config.learning_rate << '\n'
      << "rollout_horizon = " << config.rollout_horizon << '\n'
      << "update_epochs = " << config.update_epochs << '\n'
      << "minibatch_size = " << config.minibatch_size << '\n'
      << "entropy_coef = " << config.entropy_coef << '\n'
      << "value_coef = " << config.value_coef << '\n';
  out << "hidden_layers = ";
  for (std::size_t i = 0; i < config.hidden_layers.size(); ++i) {
    if (i > 0) out << ',';
    out << config.hidden_layers[i];
  }
  out << '\n'
      << "total_timesteps = " << config.total_timesteps << '\n'
      << "eval_interval = " << config.eval_interval << '\n'
      << "seed = " << config.seed << '\n';
  return out.str();
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string run_config_hash(const RunRecord& record) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(env_config_to_text(record.env), h);
  h = fnv1a(ppo_config_to_text(record.ppo), h);
  h = fnv1a("eval_episodes = " + std::to_string(record.eval_episodes) + "\n",
            h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

json env_to_json(const EnvConfig& c) {
  return json{{"num_nodes", c.num_nodes},
              {"entry_node", c.entry_node},
              {"agent_order", to_string(c.agent_order)},
              {"action_space", to_string(c.action_space)},
              {"episode_length", c.episode_length},
              {"red_attack_prob", c.red_attack_prob},
              {"detection_prob", c.detection_prob},
              {"decoy_lifetime", to_string(c.decoy_lifetime)},
              {"red_target_mode", to_string(c.red_target_mode)},
              {"reward_function", to_string(c.reward_function)},
              {"rng_seed", c.rng_seed}};
}

EnvConfig env_from_json(const json& j) {
  EnvConfig c;
  c.num_nodes = j.at("num_nodes").get<int>();
  c.entry_node = j.at("entry_node").get<int>();
  c.agent_order = parse_agent_order(j.at("agent_order").get<std::string>());
  c.action_space = parse_action_space(j.at("action_space").get<std::string>());
  c.episode_length = j.at("episode_length").get<int>();
  c.red_attack_prob = j.at("red_attack_prob").get<double>();
  c.detection_prob = j.at("detection_prob").get<double>();
  c.decoy_lifetime =
      parse_decoy_lifetime(j.at("decoy_lifetime").get<std::string>());
  c.red_target_mode =
      parse_red_target_mode(j.at("red_target_mode").get<std::string>());
  c.reward_function =
      parse_reward_kind(j.at("reward_function").get<std::string>());
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return c;
}

json ppo_to_json(const PpoConfig& c) {
  return json{{"gamma", c.gamma},
              {"gae_lambda", c.gae_lambda},
              {"clip_epsilon", c.clip_epsilon},
              {"learning_rate", c.learning_rate},
              {"rollout_horizon", c.rollout_horizon},
              {"update_epochs", c.update_epochs},
              {"minibatch_size", c.minibatch_size},
              {"entropy_coef", c.entropy_coef},
              {"value_coef", c.value_coef},
              {"hidden_layers", c.hidden_layers},
              {"total_timesteps", c.total_timesteps},
              {"eval_interval", c.eval_interval},
              {"seed", c.seed}};
}

PpoConfig ppo_from_json(const json& j) {
  PpoConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.gae_lambda = j.at("gae_lambda").get<double>();
  c.clip_epsilon = j.at("clip_epsilon").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.rollout_horizon = j.at("rollout_horizon").get<int>();
  c.update_epochs = j.at("update_epochs").get<int>();
  c.minibatch_size = j.at("minibatch_size").get<int>();
  c.entropy_coef = j.at("entropy_coef").get<double>();
  c.value_coef = j.at("value_coef").get<double>();
  c.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
  c.total_timesteps = j.at("total_timesteps").get<std::int64_t>();
  c.eval_interval = j.at("eval_interval").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string run_record_to_json(const RunRecord& record) {
  json j;
  j["config_hash"] = record.config_hash;
  j["seed"] = record.seed;
  j["status"] = to_string(record.status);
  j["duration_seconds"] = record.duration_seconds;
  j["eval_episodes"] = record.eval_episodes;
  j["env"] = env_to_json(record.env);
  j["ppo"] = ppo_to_json(record.ppo);
  j["curve"] = json{{"timesteps", record.curve.timesteps},
                    {"episodic_reward", record.curve.episodic_reward},
                    {"ground_truth_score", record.curve.ground_truth_score}};
  if (record.status == RunStatus::Completed) {
    j["evaluation"] =
        json{{"ground_truth_mean", record.evaluation.ground_truth_mean},
             {"ground_truth_se", record.evaluation.ground_truth_se},
             {"episodic_reward_mean", record.evaluation.episodic_reward_mean},
             {"episodic_reward_se", record.evaluation.episodic_reward_se},
             {"episodes", record.evaluation.episodes}};
  }
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad record JSON: ") + e.what());
  }
  try {
    RunRecord record;
    record.config_hash = j.at("config_hash").get<std::string>();
    record.seed = j.at("seed").get<std::uint64_t>();
    record.status = parse_run_status(j.at("status").get<std::string>());
    record.duration_seconds = j.at("duration_seconds").get<double>();
    record.eval_episodes = j.at("eval_episodes").get<int>();
    record.env = env_from_json(j.at("env"));
    record.ppo = ppo_from_json(j.at("ppo"));
    const json& curve = j.at("curve");
    record.curve.timesteps =
        curve.at("timesteps").get<std::vector<std::int64_t>>();
    record.curve.episodic_reward =
        curve.at("episodic_reward").get<std::vector<double>>();
    record.curve.ground_truth_score =
        curve.at("ground_truth_score").get<std::vector<double>>();
    if (j.contains("evaluation")) {
      const json& ev = j.at("evaluation");
      record.evaluation.ground_truth_mean =
          ev.at("ground_truth_mean").get<double>();
      record.evaluation.ground_truth_se =
          ev.at("ground_truth_se").get<double>();
      record.evaluation.episodic_reward_mean =
          ev.at("episodic_reward_mean").get<double>();
      record.evaluation.episodic_reward_se =
          ev.at("episodic_reward_se").get<double>();
      record.evaluation.episodes = ev.at("episodes").get<int>();
    }
    return record;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad record JSON: ") + e.what());
  }
}

namespace {

std::string cell_dir_name(const EnvConfig& env) {
  return "n" + std::to_string(env.num_nodes) + "_" +
         to_string(env.reward_function) + "_" + to_string(env.agent_order) +
         "_" + to_string(env.action_space);
}

}  // namespace

std::string record_path(const std::string& out_dir, const RunRecord& record) {
  return out_dir + "/" + cell_dir_name(record.env) + "/seed_" +
         std::to_string(record.seed) + ".json";
}

namespace {

RunRecord make_job(const SweepSpec& spec, int size, RewardFunctionKind reward,
                   AgentOrder order, ActionSpace space, std::uint64_t seed) {
  RunRecord job;
  job.env = spec.env;
  job.env.num_nodes = size;
  job.env.reward_function = reward;
  job.env.agent_order = order;
  job.env.action_space = space;
  job.env.rng_seed = seed;
  job.ppo = spec.ppo;
  job.ppo.seed = seed;
  job.ppo.total_timesteps = spec.timesteps_override
                                ? *spec.timesteps_override
                                : default_timesteps(size);
  job.eval_episodes = spec.eval_episodes;
  job.seed = seed;
  job.config_hash = run_config_hash(job);
  return job;
}

void write_record_file(const std::string& path, const RunRecord& record) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write record: " + tmp);
    out << run_record_to_json(record);
    if (!out) throw IoError("short write: " + tmp);
  }
  fs::rename(tmp, path);
}

// Executes one job in place: resume from its record file when the stored
// hash matches, otherwise train, evaluate, and persist.
bool execute_job(const SweepSpec& spec, RunRecord& job) {
  const std::string path = record_path(spec.out_dir, job);
  if (fs::exists(path)) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunRecord existing = run_record_from_json(buffer.str());
    if (existing.config_hash != job.config_hash) {
      throw ConfigError("record " + path +
                        " was produced by a different config; move it away "
                        "or delete it to re-run");
    }
    job = std::move(existing);
    return false;
  }

  const auto t0 = std::chrono::steady_clock::now();
  TrainingCurve partial;
  try {
    TrainResult result = train(
        job.env, job.ppo,
        [&partial](std::int64_t t, double reward, double score) {
          partial.timesteps.push_back(t);
          partial.episodic_reward.push_back(reward);
          partial.ground_truth_score.push_back(score);
        });
    job.curve = std::move(result.curve);
    job.evaluation =
        evaluate_policy(result.params, job.env, job.eval_episodes, true);
    job.status = RunStatus::Completed;
  } catch (const NonFiniteLoss&) {
    job.curve = std::move(partial);
    job.status = RunStatus::Diverged;
  }
  job.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_record_file(path, job);
  return true;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec_in) {
  SweepSpec spec = spec_in;
  validate_spec(spec);

  std::vector<RunRecord> jobs;
  for (int size : spec.network_sizes) {
    for (RewardFunctionKind reward : spec.reward_functions) {
      for (AgentOrder order : spec.agent_orders) {
        for (ActionSpace space : spec.action_spaces) {
          fs::create_directories(
              fs::path(spec.out_dir) /
              cell_dir_name(make_job(spec, size, reward, order, space,
                                     spec.seeds.front())
                                .env));
          for (std::uint64_t seed : spec.seeds) {
            jobs.push_back(make_job(spec, size, reward, order, space, seed));
          }
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> executed{0};
  std::atomic<int> skipped{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        if (execute_job(spec, jobs[i])) {
          executed.fetch_add(1);
        } else {
          skipped.fetch_add(1);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int thread_count = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(spec.parallel_workers),
                            jobs.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult result;
  result.records = std::move(jobs);
  result.executed = executed.load();
  result.skipped = skipped.load();
  return result;
}

bool operator==(const CellKey& a, const CellKey& b) {
  return a.num_nodes == b.num_nodes && a.reward == b.reward &&
         a.order == b.order && a.space == b.space;
}

bool operator<(const CellKey& a, const CellKey& b) {
  return std::tie(a.num_nodes, a.reward, a.order, a.space) <
         std::tie(b.num_nodes, b.reward, b.order, b.space);
}

namespace {

// Canonical text of everything except the per-run seed.
std::string seedless_config_text(const RunRecord& record) {
  EnvConfig env = record.env;
  env.rng_seed = 0;
  PpoConfig ppo = record.ppo;
  ppo.seed = 0;
  return env_config_to_text(env) + ppo_config_to_text(ppo) +
         "eval_episodes = " + std::to_string(record.eval_episodes) + "\n";
}

}  // namespace

std::vector<CellSummary> aggregate(const std::vector<RunRecord>& records,
                                   int dv_window) {
  std::map<CellKey, std::vector<const RunRecord*>> cells;
  for (const RunRecord& record : records) {
    const CellKey key{record.env.num_nodes, record.env.reward_function,
                      record.env.agent_order, record.env.action_space};
    cells[key].push_back(&record);
  }

  std::vector<CellSummary> summaries;
  summaries.reserve(cells.size());
  for (auto& [key, cell] : cells) {
    // Seed order must not affect the output.
    std::sort(cell.begin(), cell.end(),
              [](const RunRecord* a, const RunRecord* b) {
                return a->seed < b->seed;
              });
    const std::string reference = seedless_config_text(*cell.front());
    for (const RunRecord* record : cell) {
      if (seedless_config_text(*record) != reference) {
        throw MixedConfig("records in cell " + cell_dir_name(record->env) +
                          " disagree on configuration");
      }
    }

    CellSummary summary;
    summary.key = key;
    summary.dv_window = dv_window;

    std::vector<const RunRecord*> completed;
    for (const RunRecord* record : cell) {
      if (record->status == RunStatus::Completed) {
        completed.push_back(record);
      } else {
        ++summary.n_diverged;
      }
    }
    summary.n_seeds = static_cast<int>(completed.size());
    if (completed.empty()) {
      summaries.push_back(std::move(summary));
      continue;
    }

    double mean = 0.0;
    double reward_mean = 0.0;
    for (const RunRecord* record : completed) {
      mean += record->evaluation.ground_truth_mean;
      reward_mean += record->evaluation.episodic_reward_mean;
    }
    mean /= static_cast<double>(completed.size());
    reward_mean /= static_cast<double>(completed.size());
    summary.eval_score_mean = mean;
    summary.episodic_reward_mean = reward_mean;
    if (completed.size() > 1) {
      double var = 0.0;
      for (const RunRecord* record : completed) {
        const double d = record->evaluation.ground_truth_mean - mean;
        var += d * d;
      }
      var /= static_cast<double>(completed.size() - 1);
      summary.eval_score_se =
          std::sqrt(var / static_cast<double>(completed.size()));
    }

    std::size_t points = completed.front()->curve.size();
    for (const RunRecord* record : completed) {
      points = std::min(points, record->curve.size());
    }
    summary.curve_timesteps.assign(
        completed.front()->curve.timesteps.begin(),
        completed.front()->curve.timesteps.begin() +
            static_cast<std::ptrdiff_t>(points));
    summary.mean_episodic_reward.assign(points, 0.0);
    summary.mean_ground_truth.assign(points, 0.0);
    for (const RunRecord* record : completed) {
      for (std::size_t i = 0; i < points; ++i) {
        summary.mean_episodic_reward[i] += record->curve.episodic_reward[i];
        summary.mean_ground_truth[i] += record->curve.ground_truth_score[i];
      }
    }
    for (std::size_t i = 0; i < points; ++i) {
      summary.mean_episodic_reward[i] /= static_cast<double>(completed.size());
      summary.mean_ground_truth[i] /= static_cast<double>(completed.size());
    }
    // DV needs at least two first differences.
    summary.dv = points >= 3
                     ? dispersion_variability(summary.mean_ground_truth,
                                              dv_window)
                     : 0.0;
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

std::vector<RunRecord> load_records(const std::string& dir) {
  if (!fs::exists(dir)) throw IoError("no such record directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> records;
  records.reserve(paths.size());
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read record: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    records.push_back(run_record_from_json(buffer.str()));
  }
  return records;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown-table") return ReportFormat::MarkdownTable;
  if (name == "plot-data") return ReportFormat::PlotData;
  throw ConfigError("unknown report format: " + name);
}

namespace {

std::string format_double(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
  return std::string(buf);
}

}  // namespace

void export_csv(const std::vector<CellSummary>& summaries, std::ostream& out) {
  out << "size,reward,order,space,n_seeds,n_diverged,eval_score_mean,"
         "eval_score_se,dv,window\n";
  for (const CellSummary& s : summaries) {
    out << s.key.num_nodes << ',' << to_string(s.key.reward) << ','
        << to_string(s.key.order) << ',' << to_string(s.key.space) << ','
        << s.n_seeds << ',' << s.n_diverged << ','
        << format_double(s.eval_score_mean, 6) << ','
        << format_double(s.eval_score_se, 6) << ','
        << format_double(s.dv, 9) << ',' << s.dv_window << '\n';
  }
}

namespace {

const CellSummary* find_cell(const std::vector<CellSummary>& summaries,
                             int size, RewardFunctionKind reward,
                             AgentOrder order, ActionSpace space) {
  for (const CellSummary& s : summaries) {
    if (s.key.num_nodes == size && s.key.reward == reward &&
        s.key.order == order && s.key.space == space) {
      return &s;
    }
  }
  return nullptr;
}

template <typename T>
std::vector<T> sorted_unique(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

void export_markdown_table(const std::vector<CellSummary>& summaries,
                           std::ostream& out) {
  std::vector<ActionSpace> spaces;
  std::vector<AgentOrder> orders;
  std::vector<int> sizes;
  std::vector<RewardFunctionKind> rewards;
  for (const CellSummary& s : summaries) {
    spaces.push_back(s.key.space);
    orders.push_back(s.key.order);
    sizes.push_back(s.key.num_nodes);
    rewards.push_back(s.key.reward);
  }
  spaces = sorted_unique(std::move(spaces));
  orders = sorted_unique(std::move(orders));
  sizes = sorted_unique(std::move(sizes));
  rewards = sorted_unique(std::move(rewards));

  bool first = true;
  for (ActionSpace space : spaces) {
    if (!first) out << '\n';
    first = false;
    out << "## Action space: " << to_string(space) << "\n\n";
    out << "| Agent Order | Network Size |";
    for (RewardFunctionKind reward : rewards) {
      out << ' ' << to_string(reward) << " Eval Score | " << to_string(reward)
          << " DV (e-3) |";
    }
    out << '\n';
    out << "| --- | --- |";
    for (std::size_t i = 0; i < rewards.size(); ++i) out << " --- | --- |";
    out << '\n';
    for (AgentOrder order : orders) {
      bool first_row = true;
      for (int size : sizes) {
        bool any = false;
        for (RewardFunctionKind reward : rewards) {
          if (find_cell(summaries, size, reward, order, space)) any = true;
        }
        if (!any) continue;
        out << "| " << (first_row ? to_string(order) : std::string()) << " | "
            << size << " |";
        first_row = false;
        for (RewardFunctionKind reward : rewards) {
          const CellSummary* cell =
              find_cell(summaries, size, reward, order, space);
          if (cell == nullptr) {
            out << " - | - |";
          } else {
            out << ' ' << format_double(cell->eval_score_mean, 2) << " | "
                << format_double(cell->dv * 1000.0, 2) << " |";
          }
        }
        out << '\n';
      }
    }
  }
}

void export_report(const std::vector<CellSummary>& summaries,
                   ReportFormat format, const std::string& out_path) {
  if (summaries.empty()) {
    throw InvalidConfig("nothing to report: no cell summaries");
  }
  switch (format) {
    case ReportFormat::Csv:
    case ReportFormat::MarkdownTable: {
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) throw IoError("cannot write report: " + out_path);
      if (format == ReportFormat::Csv) {
        export_csv(summaries, out);
      } else {
        export_markdown_table(summaries, out);
      }
      if (!out) throw IoError("short write: " + out_path);
      return;
    }
    case ReportFormat::PlotData: {
      fs::create_directories(out_path);
      for (const CellSummary& s : summaries) {
        EnvConfig env;
        env.num_nodes = s.key.num_nodes;
        env.reward_function = s.key.reward;
        env.agent_order = s.key.order;
        env.action_space = s.key.space;
        const std::string path =
            out_path + "/" + cell_dir_name(env) + ".dat";
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write plot data: " + path);
        out << "# timesteps mean_episodic_reward mean_ground_truth_score\n";
        for (std::size_t i = 0; i < s.curve_timesteps.size(); ++i) {
          out << s.curve_timesteps[i] << ' '
              << format_double(s.mean_episodic_reward[i], 6) << ' '
              << format_double(s.mean_ground_truth[i], 6) << '\n';
        }
        if (!out) throw IoError("short write: " + path);
      }
      return;
    }
  }
}

EvaluationSummary run_oracle_episodes(OraclePolicyKind kind,
                                      const EnvConfig& env_config,
                                      int episodes, std::ostream* trace_out) {
  Env env(env_config);
  std::vector<double> scores;
  std::vector<double> rewards;
  scores.reserve(static_cast<std::size_t>(episodes));
  rewards.reserve(static_cast<std::size_t>(episodes));

  std::vector<double> obs = env.observation();
  for (int ep = 0; ep < episodes; ++ep) {
    if (ep > 0) obs = env.reset();
    double reward_sum = 0.0;
    double penalty_sum = 0.0;
    int steps = 0;
    while (true) {
      const BlueAction action = oracle_select_action(
          kind, obs, env_config.num_nodes, env_config.entry_node,
          env_config.action_space);
      Env::StepResult sr = env.step(action);
      if (trace_out != nullptr) write_trace(*trace_out, sr.trace);
      reward_sum += sr.reward;
      penalty_sum += step_ground_truth_penalty(sr.trace);
      ++steps;
      if (sr.done) break;
      obs = std::move(sr.observation);
    }
    scores.push_back(penalty_sum / static_cast<double>(steps));
    rewards.push_back(reward_sum);
  }

  EvaluationSummary summary;
  summary.episodes = episodes;
  double mean = 0.0;
  double reward_mean = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    mean += scores[i];
    reward_mean += rewards[i];
  }
  mean /= static_cast<double>(scores.size());
  reward_mean /= static_cast<double>(rewards.size());
  summary.ground_truth_mean = mean;
  summary.episodic_reward_mean = reward_mean;
  if (scores.size() > 1) {
    double var = 0.0;
    double reward_var = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      var += (scores[i] - mean) * (scores[i] - mean);
      reward_var += (rewards[i] - reward_mean) * (rewards[i] - reward_mean);
    }
    const double n = static_cast<double>(scores.size());
    summary.ground_truth_se = std::sqrt(var / (n - 1.0) / n);
    summary.episodic_reward_se = std::sqrt(reward_var / (n - 1.0) / n);
  }
  return summary;
}

}  // namespace redline
