#ifndef REDLINE_AGENTS_HPP_
#define REDLINE_AGENTS_HPP_

#include <string>
#include <vector>

#include "redline/rng.hpp"

namespace redline {

struct NetworkState;
struct BlueAction;
struct RedAction;
enum class ActionSpace;
enum class RedTargetMode;

// Scripted stochastic attacker: attacks with probability attack_prob each
// turn, otherwise lies dormant.
struct RedPolicyConfig {
  double attack_prob = 0.9;
  RedTargetMode target_mode{};  // DeepestCandidate by default via EnvConfig
};

// Candidate targets: the entry node while uncompromised, plus every
// uncompromised chain neighbour of a compromised node (lateral movement
// only). DeepestCandidate picks the largest index; UniformCandidate picks
// uniformly. An attack roll with no candidates degrades to DoNothing.
RedAction red_select_action(const NetworkState& state,
                            const RedPolicyConfig& config, int entry_node,
                            Rng& rng);

// Hand-coded blue baselines used as analytic fixtures.
//   RestoreEntry        - always Restore(entry)
//   DecoyEntry          - PlaceDecoy(entry) while entry looks clean, else
//                         Restore(entry); Extended space only
//   GreedyRestoreDeepest- Restore the deepest node believed compromised,
//                         Scan when none
//   NoOp                - always Scan
enum class OraclePolicyKind { RestoreEntry, DecoyEntry, GreedyRestoreDeepest, NoOp };

std::string to_string(OraclePolicyKind kind);
OraclePolicyKind parse_oracle_kind(const std::string& name);

// Oracles act on the observation (the known-compromise block), not the true
// state, so they stay valid under imperfect detection. Throws IllegalPolicy
// for DecoyEntry in the Basic space.
BlueAction oracle_select_action(OraclePolicyKind kind,
                                const std::vector<double>& observation,
                                int num_nodes, int entry_node,
                                ActionSpace space);

}  // namespace redline

#endif  // REDLINE_AGENTS_HPP_
