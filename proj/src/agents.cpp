#include "redline/agents.hpp"

#include <algorithm>

#include "redline/env.hpp"
#include "redline/errors.hpp"

namespace redline {

RedAction red_select_action(const NetworkState& state,
                            const RedPolicyConfig& config, int entry_node,
                            Rng& rng) {
  const bool attack_roll = rng.uniform() < config.attack_prob;
  if (!attack_roll) return RedAction::do_nothing();

  const int n = static_cast<int>(state.compromised.size());
  std::vector<int> candidates;
  if (!state.compromised[entry_node]) candidates.push_back(entry_node);
  for (int i = 0; i < n; ++i) {
    if (!state.compromised[i]) continue;
    for (int j : {i - 1, i + 1}) {
      if (j < 0 || j >= n || state.compromised[j]) continue;
      if (std::find(candidates.begin(), candidates.end(), j) == candidates.end()) {
        candidates.push_back(j);
      }
    }
  }
  if (candidates.empty()) return RedAction::do_nothing();

  if (config.target_mode == RedTargetMode::DeepestCandidate) {
    return RedAction::basic_attack(
        *std::max_element(candidates.begin(), candidates.end()));
  }
  return RedAction::basic_attack(
      candidates[rng.uniform_int(candidates.size())]);
}

std::string to_string(OraclePolicyKind kind) {
  switch (kind) {
    case OraclePolicyKind::RestoreEntry: return "restore-entry";
    case OraclePolicyKind::DecoyEntry: return "decoy-entry";
    case OraclePolicyKind::GreedyRestoreDeepest: return "greedy-restore-deepest";
    case OraclePolicyKind::NoOp: return "noop";
  }
  return "?";
}

OraclePolicyKind parse_oracle_kind(const std::string& name) {
  if (name == "restore-entry") return OraclePolicyKind::RestoreEntry;
  if (name == "decoy-entry") return OraclePolicyKind::DecoyEntry;
  if (name == "greedy-restore-deepest") return OraclePolicyKind::GreedyRestoreDeepest;
  if (name == "noop") return OraclePolicyKind::NoOp;
  throw InvalidConfig("unknown oracle policy: " + name);
}

BlueAction oracle_select_action(OraclePolicyKind kind,
                                const std::vector<double>& observation,
                                int num_nodes, int entry_node,
                                ActionSpace space) {
  if (kind == OraclePolicyKind::DecoyEntry && space != ActionSpace::Extended) {
    throw IllegalPolicy("decoy-entry requires the extended action space");
  }
  // known-compromise block = last N observation entries
  const std::size_t base = observation.size() - static_cast<std::size_t>(num_nodes);
  auto looks_compromised = [&](int i) {
    return observation[base + static_cast<std::size_t>(i)] > 0.5;
  };

  switch (kind) {
    case OraclePolicyKind::RestoreEntry:
      return BlueAction::restore(entry_node);
    case OraclePolicyKind::DecoyEntry:
      return looks_compromised(entry_node) ? BlueAction::restore(entry_node)
                                           : BlueAction::place_decoy(entry_node);
    case OraclePolicyKind::GreedyRestoreDeepest:
      for (int i = num_nodes - 1; i >= 0; --i) {
        if (looks_compromised(i)) return BlueAction::restore(i);
      }
      return BlueAction::scan();
    case OraclePolicyKind::NoOp:
      return BlueAction::scan();
  }
  return BlueAction::scan();
}

}  // namespace redline
