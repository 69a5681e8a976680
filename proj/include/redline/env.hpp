#ifndef REDLINE_ENV_HPP_
#define REDLINE_ENV_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "redline/rewards.hpp"
#include "redline/rng.hpp"

namespace redline {

enum class AgentOrder { RedThenBlue, BlueThenRed };
enum class ActionSpace { Basic, Extended };
enum class DecoyLifetime { CurrentStepOnly, UntilConsumed };
enum class RedTargetMode { DeepestCandidate, UniformCandidate };
enum class Actor { Red, Blue };

std::string to_string(AgentOrder order);
std::string to_string(ActionSpace space);
std::string to_string(DecoyLifetime lifetime);
std::string to_string(RedTargetMode mode);
AgentOrder parse_agent_order(const std::string& name);
ActionSpace parse_action_space(const std::string& name);
DecoyLifetime parse_decoy_lifetime(const std::string& name);
RedTargetMode parse_red_target_mode(const std::string& name);

// Topology is always a linear chain: node i is adjacent to i-1 and i+1 only.
struct EnvConfig {
  int num_nodes = 2;
  int entry_node = 0;
  AgentOrder agent_order = AgentOrder::RedThenBlue;
  ActionSpace action_space = ActionSpace::Basic;
  int episode_length = 100;
  double red_attack_prob = 0.9;
  double detection_prob = 1.0;
  DecoyLifetime decoy_lifetime = DecoyLifetime::CurrentStepOnly;
  RedTargetMode red_target_mode = RedTargetMode::DeepestCandidate;
  RewardFunctionKind reward_function = RewardFunctionKind::SparsePositive;
  std::uint64_t rng_seed = 0;
};

// Throws InvalidConfig if any field is out of range.
void validate(const EnvConfig& config);

// Ground-truth simulator state. vulnerability is fixed at 1.0 and isolated at
// false for every node; both are kept explicit because the observation
// encodes them.
struct NetworkState {
  std::vector<std::uint8_t> compromised;
  std::vector<std::uint8_t> decoy_present;
  std::vector<std::uint8_t> known_compromised;  // blue's belief
  std::vector<double> vulnerability;
  std::vector<std::uint8_t> isolated;
  int step_index = 0;
};

struct BlueAction {
  enum class Type { Scan, Restore, PlaceDecoy };
  Type type = Type::Scan;
  int target = 0;  // ignored for Scan

  static BlueAction scan() { return {Type::Scan, 0}; }
  static BlueAction restore(int t) { return {Type::Restore, t}; }
  static BlueAction place_decoy(int t) { return {Type::PlaceDecoy, t}; }
};

struct RedAction {
  enum class Type { DoNothing, BasicAttack };
  Type type = Type::DoNothing;
  int target = 0;  // ignored for DoNothing

  static RedAction do_nothing() { return {Type::DoNothing, 0}; }
  static RedAction basic_attack(int t) { return {Type::BasicAttack, t}; }
};

std::string to_string(const BlueAction& action);
std::string to_string(const RedAction& action);

// Ordered post-action snapshots within one time step.
struct StepTrace {
  struct Snapshot {
    Actor actor;
    std::variant<RedAction, BlueAction> action;
    std::vector<std::uint8_t> compromised;  // state right after the action
  };
  int step_index = 0;
  std::vector<Snapshot> snapshots;              // exactly one red + one blue
  std::vector<std::uint8_t> compromised_union;  // OR over snapshots, per node
};

// Number of discrete blue actions: Basic 1+N (Scan, Restore per node),
// Extended 1+2N (adds PlaceDecoy per node).
int action_count(const EnvConfig& config);

// Scan refreshes blue's belief; Restore cleans a node; PlaceDecoy arms an
// uncompromised node (silent no-op on a compromised one).
void apply_blue_action(NetworkState& state, const BlueAction& action);

// BasicAttack always succeeds against a non-decoyed node (vulnerability 1);
// a decoy absorbs the attack, and is consumed when lifetime is UntilConsumed.
void apply_red_action(NetworkState& state, const RedAction& action,
                      const EnvConfig& config, Rng& rng);

class Env {
 public:
  // Throws InvalidConfig; starts fully clean at step 0.
  explicit Env(const EnvConfig& config);

  // Reinitializes the state. The RNG stream continues (fresh episode under
  // the same seed lineage) unless an explicit seed is supplied.
  std::vector<double> reset();
  std::vector<double> reset(std::uint64_t seed);

  struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    StepTrace trace;
  };

  // Runs one time step: both agent turns in the configured order (the red
  // action is sampled internally), snapshots after each turn, decoy expiry,
  // then the reward of the end-of-step state. Throws IllegalAction or
  // EpisodeFinished.
  StepResult step(const BlueAction& blue_action);

  // Flat vector of length N^2 + 3N: adjacency (row-major), vulnerability,
  // isolation flags, known-compromise flags.
  std::vector<double> observation() const;
  int observation_size() const;

  // Discrete-action encoding: 0 = Scan, 1..N = Restore(i-1),
  // N+1..2N = PlaceDecoy(i-N-1) in the Extended space.
  BlueAction decode_action(int index) const;
  int encode_action(const BlueAction& action) const;

  const EnvConfig& config() const { return config_; }
  const NetworkState& state() const { return state_; }
  bool done() const { return done_; }

 private:
  void check_legal(const BlueAction& action) const;
  void init_state();

  EnvConfig config_;
  NetworkState state_;
  Rng rng_;
  bool done_ = false;
};

// Line-delimited trace export: one line per snapshot,
//   <step_index> <actor> <action> <hex bitmask>
// with node 0 as the least significant bit of the mask.
void write_trace(std::ostream& out, const StepTrace& trace);
std::string compromised_hex(const std::vector<std::uint8_t>& flags);

// Key-value config file with the exact EnvConfig field names; see
// docs/formats.md. Throws ConfigError / InvalidConfig.
EnvConfig load_env_config(const std::string& path);
void save_env_config(std::ostream& out, const EnvConfig& config);
EnvConfig env_config_from_text(const std::string& text);
std::string env_config_to_text(const EnvConfig& config);

}  // namespace redline

#endif  // REDLINE_ENV_HPP_
