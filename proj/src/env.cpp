#include "redline/env.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "redline/agents.hpp"
#include "redline/errors.hpp"
#include "redline/kvconfig.hpp"

namespace redline {

std::string to_string(AgentOrder order) {
  return order == AgentOrder::RedThenBlue ? "red-then-blue" : "blue-then-red";
}

std::string to_string(ActionSpace space) {
  return space == ActionSpace::Basic ? "basic" : "extended";
}

std::string to_string(DecoyLifetime lifetime) {
  return lifetime == DecoyLifetime::CurrentStepOnly ? "current-step-only"
                                                    : "until-consumed";
}

std::string to_string(RedTargetMode mode) {
  return mode == RedTargetMode::DeepestCandidate ? "deepest-candidate"
                                                 : "uniform-candidate";
}

AgentOrder parse_agent_order(const std::string& name) {
  if (name == "red-then-blue") return AgentOrder::RedThenBlue;
  if (name == "blue-then-red") return AgentOrder::BlueThenRed;
  throw InvalidConfig("unknown agent order: " + name);
}

ActionSpace parse_action_space(const std::string& name) {
  if (name == "basic") return ActionSpace::Basic;
  if (name == "extended") return ActionSpace::Extended;
  throw InvalidConfig("unknown action space: " + name);
}

DecoyLifetime parse_decoy_lifetime(const std::string& name) {
  if (name == "current-step-only") return DecoyLifetime::CurrentStepOnly;
  if (name == "until-consumed") return DecoyLifetime::UntilConsumed;
  throw InvalidConfig("unknown decoy lifetime: " + name);
}

RedTargetMode parse_red_target_mode(const std::string& name) {
  if (name == "deepest-candidate") return RedTargetMode::DeepestCandidate;
  if (name == "uniform-candidate") return RedTargetMode::UniformCandidate;
  throw InvalidConfig("unknown red target mode: " + name);
}

std::string to_string(const BlueAction& action) {
  switch (action.type) {
    case BlueAction::Type::Scan: return "scan";
    case BlueAction::Type::Restore: return "restore:" + std::to_string(action.target);
    case BlueAction::Type::PlaceDecoy:
      return "place-decoy:" + std::to_string(action.target);
  }
  return "?";
}

std::string to_string(const RedAction& action) {
  switch (action.type) {
    case RedAction::Type::DoNothing: return "do-nothing";
    case RedAction::Type::BasicAttack:
      return "basic-attack:" + std::to_string(action.target);
  }
  return "?";
}

void validate(const EnvConfig& config) {
  if (config.num_nodes < 2) {
    throw InvalidConfig("num_nodes must be >= 2, got " +
                        std::to_string(config.num_nodes));
  }
  if (config.entry_node < 0 || config.entry_node >= config.num_nodes) {
    throw InvalidConfig("entry_node out of range: " +
                        std::to_string(config.entry_node));
  }
  if (config.episode_length < 1) {
    throw InvalidConfig("episode_length must be >= 1");
  }
  if (config.red_attack_prob < 0.0 || config.red_attack_prob > 1.0) {
    throw InvalidConfig("red_attack_prob must be in [0,1]");
  }
  if (config.detection_prob < 0.0 || config.detection_prob > 1.0) {
    throw InvalidConfig("detection_prob must be in [0,1]");
  }
}

int action_count(const EnvConfig& config) {
  validate(config);
  return config.action_space == ActionSpace::Basic ? 1 + config.num_nodes
                                                   : 1 + 2 * config.num_nodes;
}

void apply_blue_action(NetworkState& state, const BlueAction& action) {
  switch (action.type) {
    case BlueAction::Type::Scan:
      state.known_compromised = state.compromised;
      break;
    case BlueAction::Type::Restore:
      state.compromised[action.target] = 0;
      state.known_compromised[action.target] = 0;
      break;
    case BlueAction::Type::PlaceDecoy:
      // A canary on an attacker-owned host is meaningless: silent no-op.
      if (!state.compromised[action.target]) {
        state.decoy_present[action.target] = 1;
      }
      break;
  }
}

void apply_red_action(NetworkState& state, const RedAction& action,
                      const EnvConfig& config, Rng& rng) {
  if (action.type == RedAction::Type::DoNothing) return;
  const int t = action.target;
  if (state.decoy_present[t]) {
    // Attack absorbed; the node stays clean.
    if (config.decoy_lifetime == DecoyLifetime::UntilConsumed) {
      state.decoy_present[t] = 0;
    }
    return;
  }
  state.compromised[t] = 1;  // vulnerability 1: a launched attack never fails
  if (config.detection_prob >= 1.0) {
    state.known_compromised[t] = 1;
  } else if (config.detection_prob > 0.0 &&
             rng.uniform() < config.detection_prob) {
    state.known_compromised[t] = 1;
  }
}

Env::Env(const EnvConfig& config)
    : config_(config), rng_(config.rng_seed) {
  validate(config_);
  init_state();
}

void Env::init_state() {
  const std::size_t n = static_cast<std::size_t>(config_.num_nodes);
  state_.compromised.assign(n, 0);
  state_.decoy_present.assign(n, 0);
  state_.known_compromised.assign(n, 0);
  state_.vulnerability.assign(n, 1.0);
  state_.isolated.assign(n, 0);
  state_.step_index = 0;
  done_ = false;
}

std::vector<double> Env::reset() {
  init_state();
  return observation();
}

std::vector<double> Env::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  return reset();
}

int Env::observation_size() const {
  const int n = config_.num_nodes;
  return n * n + 3 * n;
}

std::vector<double> Env::observation() const {
  const int n = config_.num_nodes;
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(observation_size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      obs.push_back((i - j == 1 || j - i == 1) ? 1.0 : 0.0);
    }
  }
  for (int i = 0; i < n; ++i) obs.push_back(state_.vulnerability[i]);
  for (int i = 0; i < n; ++i) obs.push_back(state_.isolated[i] ? 1.0 : 0.0);
  for (int i = 0; i < n; ++i) {
    obs.push_back(state_.known_compromised[i] ? 1.0 : 0.0);
  }
  return obs;
}

void Env::check_legal(const BlueAction& action) const {
  switch (action.type) {
    case BlueAction::Type::Scan:
      return;
    case BlueAction::Type::Restore:
      if (action.target < 0 || action.target >= config_.num_nodes) {
        throw IllegalAction("restore target out of range: " +
                            std::to_string(action.target));
      }
      return;
    case BlueAction::Type::PlaceDecoy:
      if (config_.action_space != ActionSpace::Extended) {
        throw IllegalAction("place-decoy requires the extended action space");
      }
      if (action.target < 0 || action.target >= config_.num_nodes) {
        throw IllegalAction("place-decoy target out of range: " +
                            std::to_string(action.target));
      }
      return;
  }
}

Env::StepResult Env::step(const BlueAction& blue_action) {
  if (done_) throw EpisodeFinished("step() after episode end");
  check_legal(blue_action);

  StepTrace trace;
  trace.step_index = state_.step_index;
  trace.compromised_union.assign(state_.compromised.size(), 0);

  auto snapshot_after = [&](Actor actor,
                            std::variant<RedAction, BlueAction> action) {
    trace.snapshots.push_back({actor, std::move(action), state_.compromised});
    for (std::size_t i = 0; i < state_.compromised.size(); ++i) {
      trace.compromised_union[i] |= state_.compromised[i];
    }
  };

  RedPolicyConfig red_config{config_.red_attack_prob, config_.red_target_mode};
  auto red_turn = [&] {
    RedAction red = red_select_action(state_, red_config, config_.entry_node, rng_);
    apply_red_action(state_, red, config_, rng_);
    snapshot_after(Actor::Red, red);
  };
  auto blue_turn = [&] {
    apply_blue_action(state_, blue_action);
    snapshot_after(Actor::Blue, blue_action);
  };

  if (config_.agent_order == AgentOrder::RedThenBlue) {
    red_turn();
    blue_turn();
  } else {
    blue_turn();
    red_turn();
  }

  if (config_.decoy_lifetime == DecoyLifetime::CurrentStepOnly) {
    std::fill(state_.decoy_present.begin(), state_.decoy_present.end(), 0);
  }
  state_.step_index += 1;
  done_ = state_.step_index >= config_.episode_length;

  StepResult result;
  result.reward = compute_reward(config_.reward_function, state_.compromised);
  result.done = done_;
  result.trace = std::move(trace);
  result.observation = observation();
  return result;
}

BlueAction Env::decode_action(int index) const {
  const int n = config_.num_nodes;
  if (index == 0) return BlueAction::scan();
  if (index >= 1 && index <= n) return BlueAction::restore(index - 1);
  if (config_.action_space == ActionSpace::Extended && index <= 2 * n) {
    return BlueAction::place_decoy(index - n - 1);
  }
  throw IllegalAction("action index out of range: " + std::to_string(index));
}

int Env::encode_action(const BlueAction& action) const {
  const int n = config_.num_nodes;
  switch (action.type) {
    case BlueAction::Type::Scan: return 0;
    case BlueAction::Type::Restore: return 1 + action.target;
    case BlueAction::Type::PlaceDecoy: return 1 + n + action.target;
  }
  throw IllegalAction("unencodable action");
}

std::string compromised_hex(const std::vector<std::uint8_t>& flags) {
  // node 0 = least significant bit
  std::string hex;
  const std::size_t nibbles = (flags.size() + 3) / 4;
  bool leading = true;
  for (std::size_t k = nibbles; k-- > 0;) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      std::size_t bit = 4 * k + b;
      if (bit < flags.size() && flags[bit]) v |= 1u << b;
    }
    if (v == 0 && leading && k != 0) continue;
    leading = false;
    hex.push_back("0123456789abcdef"[v]);
  }
  if (hex.empty()) hex = "0";
  return hex;
}

void write_trace(std::ostream& out, const StepTrace& trace) {
  for (const auto& snap : trace.snapshots) {
    out << trace.step_index << ' '
        << (snap.actor == Actor::Red ? "red" : "blue") << ' ';
    if (snap.actor == Actor::Red) {
      out << to_string(std::get<RedAction>(snap.action));
    } else {
      out << to_string(std::get<BlueAction>(snap.action));
    }
    out << ' ' << compromised_hex(snap.compromised) << '\n';
  }
}

namespace {
const std::vector<std::string> kEnvKeys = {
    "num_nodes",      "entry_node",      "agent_order",
    "action_space",   "episode_length",  "red_attack_prob",
    "detection_prob", "decoy_lifetime",  "red_target_mode",
    "reward_function", "rng_seed"};
}

EnvConfig env_config_from_kv(const KvConfig& kv) {
  kv.require_known(kEnvKeys);
  EnvConfig cfg;
  cfg.num_nodes = static_cast<int>(kv.get_int("num_nodes", cfg.num_nodes));
  cfg.entry_node = static_cast<int>(kv.get_int("entry_node", cfg.entry_node));
  cfg.agent_order =
      parse_agent_order(kv.get_string("agent_order", to_string(cfg.agent_order)));
  cfg.action_space = parse_action_space(
      kv.get_string("action_space", to_string(cfg.action_space)));
  cfg.episode_length =
      static_cast<int>(kv.get_int("episode_length", cfg.episode_length));
  cfg.red_attack_prob = kv.get_double("red_attack_prob", cfg.red_attack_prob);
  cfg.detection_prob = kv.get_double("detection_prob", cfg.detection_prob);
  cfg.decoy_lifetime = parse_decoy_lifetime(
      kv.get_string("decoy_lifetime", to_string(cfg.decoy_lifetime)));
  cfg.red_target_mode = parse_red_target_mode(
      kv.get_string("red_target_mode", to_string(cfg.red_target_mode)));
  cfg.reward_function = parse_reward_kind(
      kv.get_string("reward_function", to_string(cfg.reward_function)));
  cfg.rng_seed = kv.get_uint("rng_seed", cfg.rng_seed);
  validate(cfg);
  return cfg;
}

EnvConfig load_env_config(const std::string& path) {
  return env_config_from_kv(KvConfig::from_file(path));
}

EnvConfig env_config_from_text(const std::string& text) {
  return env_config_from_kv(KvConfig::from_text(text));
}

void save_env_config(std::ostream& out, const EnvConfig& config) {
  out << "num_nodes = " << config.num_nodes << '\n'
      << "entry_node = " << config.entry_node << '\n'
      << "agent_order = " << to_string(config.agent_order) << '\n'
      << "action_space = " << to_string(config.action_space) << '\n'
      << "episode_length = " << config.episode_length << '\n'
      << "red_attack_prob = " << config.red_attack_prob << '\n'
      << "detection_prob = " << config.detection_prob << '\n'
      << "decoy_lifetime = " << to_string(config.decoy_lifetime) << '\n'
      << "red_target_mode = " << to_string(config.red_target_mode) << '\n'
      << "reward_function = " << to_string(config.reward_function) << '\n'
      << "rng_seed = " << config.rng_seed << '\n';
}

std::string env_config_to_text(const EnvConfig& config) {
  std::ostringstream out;
  out.precision(17);
  save_env_config(out, config);
  return out.str();
}

}  // namespace redline
