#include "redline/rewards.hpp"

#include <cstddef>

#include "redline/errors.hpp"

namespace redline {

double compute_reward(RewardFunctionKind kind,
                      const std::vector<std::uint8_t>& compromised) {
  if (compromised.empty()) throw EmptyState("compute_reward: zero nodes");
  std::size_t count = 0;
  for (std::uint8_t f : compromised) count += f ? 1 : 0;
  switch (kind) {
    case RewardFunctionKind::SparsePositive:
      return count == 0 ? 1.0 : 0.0;
    case RewardFunctionKind::SparseNegative:
      return count == compromised.size() ? -1.0 : 0.0;
    case RewardFunctionKind::Dense:
      return -static_cast<double>(count);
  }
  throw EmptyState("compute_reward: unknown kind");
}

std::string to_string(RewardFunctionKind kind) {
  switch (kind) {
    case RewardFunctionKind::SparsePositive: return "sparse-positive";
    case RewardFunctionKind::SparseNegative: return "sparse-negative";
    case RewardFunctionKind::Dense: return "dense";
  }
  return "?";
}

RewardFunctionKind parse_reward_kind(const std::string& name) {
  if (name == "sparse-positive") return RewardFunctionKind::SparsePositive;
  if (name == "sparse-negative") return RewardFunctionKind::SparseNegative;
  if (name == "dense") return RewardFunctionKind::Dense;
  throw InvalidConfig("unknown reward function: " + name);
}

}  // namespace redline
