#ifndef REDLINE_REWARDS_HPP_
#define REDLINE_REWARDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace redline {

// The three training reward functions. Each is a function of the end-of-step
// compromise flags only, never of anything that happened mid-step.
enum class RewardFunctionKind { SparsePositive, SparseNegative, Dense };

// SparsePositive: +1 iff no node is compromised, else 0.
// SparseNegative: -1 iff every node is compromised, else 0.
// Dense:          -1 per compromised node.
// Throws EmptyState on an empty flag sequence.
double compute_reward(RewardFunctionKind kind,
                      const std::vector<std::uint8_t>& compromised);

// Config/CLI names: sparse-positive, sparse-negative, dense.
std::string to_string(RewardFunctionKind kind);
RewardFunctionKind parse_reward_kind(const std::string& name);

}  // namespace redline

#endif  // REDLINE_REWARDS_HPP_
