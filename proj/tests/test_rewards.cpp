#include <cstdint>
#include <vector>

#include "doctest.h"
#include "redline/errors.hpp"
#include "redline/rewards.hpp"
#include "redline/rng.hpp"

using namespace redline;
using Flags = std::vector<std::uint8_t>;

TEST_SUITE("rewards") {

TEST_CASE("fixed states hit the defining values") {
  CHECK(compute_reward(RewardFunctionKind::Dense, Flags{1, 0, 1, 0, 0}) ==
        -2.0);
  CHECK(compute_reward(RewardFunctionKind::SparsePositive,
                       Flags{0, 0, 0, 0, 0}) == 1.0);
  CHECK(compute_reward(RewardFunctionKind::SparseNegative,
                       Flags{0, 0, 0, 0, 0}) == 0.0);
  CHECK(compute_reward(RewardFunctionKind::SparseNegative,
                       Flags{1, 1, 1, 1, 1}) == -1.0);
  CHECK(compute_reward(RewardFunctionKind::Dense, Flags{1, 1, 1, 1, 1}) ==
        -5.0);
  // partially compromised: both sparse kinds are silent
  CHECK(compute_reward(RewardFunctionKind::SparsePositive, Flags{0, 1}) == 0.0);
  CHECK(compute_reward(RewardFunctionKind::SparseNegative, Flags{0, 1}) == 0.0);
}

TEST_CASE("ranges and additivity over random states") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(12));
    Flags flags(static_cast<std::size_t>(n));
    int count = 0;
    for (auto& f : flags) {
      f = rng.uniform() < 0.5 ? 1 : 0;
      count += f;
    }
    const double sp = compute_reward(RewardFunctionKind::SparsePositive, flags);
    const double sn = compute_reward(RewardFunctionKind::SparseNegative, flags);
    const double dense = compute_reward(RewardFunctionKind::Dense, flags);
    CHECK((sp == 0.0 || sp == 1.0));
    CHECK((sn == 0.0 || sn == -1.0));
    CHECK(dense == -static_cast<double>(count));
    CHECK((sp == 1.0) == (count == 0));
    CHECK((sn == -1.0) == (count == n));
  }
}

TEST_CASE("empty state is rejected") {
  CHECK_THROWS_AS(compute_reward(RewardFunctionKind::Dense, Flags{}),
                  EmptyState);
}

TEST_CASE("kind names round-trip and bad names are rejected") {
  CHECK(to_string(RewardFunctionKind::SparsePositive) == "sparse-positive");
  CHECK(parse_reward_kind("sparse-negative") ==
        RewardFunctionKind::SparseNegative);
  CHECK(parse_reward_kind("dense") == RewardFunctionKind::Dense);
  CHECK_THROWS_AS(parse_reward_kind("sparse"), InvalidConfig);
}

}  // TEST_SUITE
