#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "redline/agents.hpp"
#include "redline/env.hpp"
#include "redline/errors.hpp"
#include "redline/rng.hpp"

using namespace redline;

namespace {

EnvConfig base_config(int n) {
  EnvConfig cfg;
  cfg.num_nodes = n;
  return cfg;
}

int count_set(const std::vector<std::uint8_t>& flags) {
  return static_cast<int>(std::count(flags.begin(), flags.end(), 1));
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("fresh environment starts clean") {
  Env env(base_config(2));
  CHECK(env.state().compromised == std::vector<std::uint8_t>{0, 0});
  CHECK(env.state().decoy_present == std::vector<std::uint8_t>{0, 0});
  CHECK(env.state().step_index == 0);
  CHECK_FALSE(env.done());
}

TEST_CASE("observation is N^2 + 3N wide with the documented blocks") {
  Env small(base_config(2));
  const std::vector<double> obs2 = small.observation();
  REQUIRE(obs2.size() == 10);
  // adjacency of the 2-chain reshapes to [[0,1],[1,0]]
  CHECK(obs2[0] == 0.0);
  CHECK(obs2[1] == 1.0);
  CHECK(obs2[2] == 1.0);
  CHECK(obs2[3] == 0.0);

  Env mid(base_config(5));
  const std::vector<double> obs5 = mid.observation();
  REQUIRE(obs5.size() == 40);
  for (int i = 0; i < 5; ++i) {
    CHECK(obs5[25 + i] == 1.0);  // vulnerability block, fixed at 1
    CHECK(obs5[30 + i] == 0.0);  // isolation block, unused
    CHECK(obs5[35 + i] == 0.0);  // known-compromise block, clean start
  }
  // adjacency block is symmetric
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      CHECK(obs5[i * 5 + j] == obs5[j * 5 + i]);
    }
  }

  Env big(base_config(50));
  CHECK(big.observation_size() == 2650);
  CHECK(big.observation().size() == 2650);
}

TEST_CASE("config validation rejects out-of-range fields") {
  EnvConfig cfg = base_config(2);
  cfg.entry_node = 5;
  CHECK_THROWS_AS(Env{cfg}, InvalidConfig);
  cfg = base_config(1);
  CHECK_THROWS_AS(Env{cfg}, InvalidConfig);
  cfg = base_config(2);
  cfg.episode_length = 0;
  CHECK_THROWS_AS(Env{cfg}, InvalidConfig);
  cfg = base_config(2);
  cfg.red_attack_prob = 1.5;
  CHECK_THROWS_AS(Env{cfg}, InvalidConfig);
}

TEST_CASE("action counts enumerate scan, restore, and decoy variants") {
  EnvConfig cfg = base_config(2);
  CHECK(action_count(cfg) == 3);
  cfg.action_space = ActionSpace::Extended;
  CHECK(action_count(cfg) == 5);
  cfg.num_nodes = 50;
  CHECK(action_count(cfg) == 101);
}

TEST_CASE("action encoding round-trips over the whole space") {
  EnvConfig cfg = base_config(3);
  cfg.action_space = ActionSpace::Extended;
  Env env(cfg);
  for (int index = 0; index < action_count(cfg); ++index) {
    CHECK(env.encode_action(env.decode_action(index)) == index);
  }
  CHECK(env.decode_action(0).type == BlueAction::Type::Scan);
  CHECK(env.decode_action(1).type == BlueAction::Type::Restore);
  CHECK(env.decode_action(1).target == 0);
  CHECK(env.decode_action(4).type == BlueAction::Type::PlaceDecoy);
  CHECK(env.decode_action(4).target == 0);
  CHECK_THROWS_AS(env.decode_action(7), IllegalAction);

  Env basic(base_config(3));
  CHECK_THROWS_AS(basic.decode_action(4), IllegalAction);
}

TEST_CASE("blue action primitives follow restore/decoy semantics") {
  NetworkState state;
  state.compromised = {1, 0};
  state.decoy_present = {0, 0};
  state.known_compromised = {0, 0};

  apply_blue_action(state, BlueAction::scan());
  CHECK(state.known_compromised == std::vector<std::uint8_t>{1, 0});

  apply_blue_action(state, BlueAction::restore(0));
  CHECK(state.compromised == std::vector<std::uint8_t>{0, 0});
  CHECK(state.known_compromised == std::vector<std::uint8_t>{0, 0});

  // restoring a clean node is an idempotent no-op
  apply_blue_action(state, BlueAction::restore(1));
  CHECK(state.compromised == std::vector<std::uint8_t>{0, 0});

  state.compromised = {1, 0};
  apply_blue_action(state, BlueAction::place_decoy(0));
  CHECK(state.decoy_present[0] == 0);  // owned host: no decoy
  apply_blue_action(state, BlueAction::place_decoy(1));
  CHECK(state.decoy_present[1] == 1);
}

TEST_CASE("red action primitives always succeed unless absorbed by a decoy") {
  EnvConfig cfg = base_config(2);
  Rng rng(0);
  NetworkState state;
  state.compromised = {0, 0};
  state.decoy_present = {0, 0};
  state.known_compromised = {0, 0};

  apply_red_action(state, RedAction::do_nothing(), cfg, rng);
  CHECK(state.compromised == std::vector<std::uint8_t>{0, 0});

  apply_red_action(state, RedAction::basic_attack(0), cfg, rng);
  CHECK(state.compromised == std::vector<std::uint8_t>{1, 0});
  CHECK(state.known_compromised[0] == 1);  // detection_prob 1: seen at once

  state.compromised = {0, 0};
  state.known_compromised = {0, 0};
  state.decoy_present = {1, 0};
  apply_red_action(state, RedAction::basic_attack(0), cfg, rng);
  CHECK(state.compromised == std::vector<std::uint8_t>{0, 0});
  CHECK(state.decoy_present[0] == 1);  // CurrentStepOnly: not consumed here

  cfg.decoy_lifetime = DecoyLifetime::UntilConsumed;
  apply_red_action(state, RedAction::basic_attack(0), cfg, rng);
  CHECK(state.compromised[0] == 0);
  CHECK(state.decoy_present[0] == 0);  // consumed on absorb
}

TEST_CASE("a dormant step leaves no footprint in the trace") {
  EnvConfig cfg = base_config(2);
  cfg.red_attack_prob = 0.0;
  cfg.reward_function = RewardFunctionKind::Dense;
  Env env(cfg);
  const Env::StepResult sr = env.step(BlueAction::scan());
  CHECK(sr.trace.compromised_union == std::vector<std::uint8_t>{0, 0});
  CHECK(sr.reward == 0.0);
}

TEST_CASE("mid-step compromise is invisible to the reward but not the trace") {
  EnvConfig cfg = base_config(2);
  cfg.red_attack_prob = 1.0;
  cfg.reward_function = RewardFunctionKind::Dense;
  Env env(cfg);
  const Env::StepResult sr = env.step(BlueAction::restore(0));
  CHECK(env.state().compromised == std::vector<std::uint8_t>{0, 0});
  CHECK(sr.reward == 0.0);
  CHECK(sr.trace.compromised_union == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("a decoy placed blue-then-red blocks the step's attack") {
  EnvConfig cfg = base_config(2);
  cfg.red_attack_prob = 1.0;
  cfg.agent_order = AgentOrder::BlueThenRed;
  cfg.action_space = ActionSpace::Extended;
  cfg.reward_function = RewardFunctionKind::SparsePositive;
  Env env(cfg);
  const Env::StepResult sr = env.step(BlueAction::place_decoy(0));
  CHECK(sr.trace.compromised_union == std::vector<std::uint8_t>{0, 0});
  CHECK(sr.reward == 1.0);
}

TEST_CASE("snapshots appear in the configured agent order") {
  for (AgentOrder order : {AgentOrder::RedThenBlue, AgentOrder::BlueThenRed}) {
    EnvConfig cfg = base_config(3);
    cfg.agent_order = order;
    Env env(cfg);
    Rng rng(5);
    for (int step = 0; step < 20; ++step) {
      const int action = static_cast<int>(rng.uniform_int(
          static_cast<std::uint64_t>(action_count(cfg))));
      const Env::StepResult sr = env.step(env.decode_action(action));
      REQUIRE(sr.trace.snapshots.size() == 2);
      const Actor first = order == AgentOrder::RedThenBlue ? Actor::Red
                                                           : Actor::Blue;
      CHECK(sr.trace.snapshots[0].actor == first);
      CHECK(sr.trace.snapshots[1].actor !=
            sr.trace.snapshots[0].actor);
      if (sr.done) env.reset();
    }
  }
}

TEST_CASE("an unopposed certain attacker sweeps the chain in order") {
  EnvConfig cfg = base_config(4);
  cfg.red_attack_prob = 1.0;
  Env env(cfg);
  for (int k = 1; k <= 6; ++k) {
    env.step(BlueAction::scan());
    const auto& compromised = env.state().compromised;
    CHECK(count_set(compromised) == std::min(k, 4));
    for (int i = 0; i < std::min(k, 4); ++i) CHECK(compromised[i] == 1);
  }
}

TEST_CASE("current-step-only decoys are gone by the next step") {
  EnvConfig cfg = base_config(2);
  cfg.red_attack_prob = 0.0;
  cfg.action_space = ActionSpace::Extended;
  Env env(cfg);
  env.step(BlueAction::place_decoy(1));
  CHECK(env.state().decoy_present == std::vector<std::uint8_t>{0, 0});

  cfg.decoy_lifetime = DecoyLifetime::UntilConsumed;
  Env sticky(cfg);
  sticky.step(BlueAction::place_decoy(1));
  CHECK(sticky.state().decoy_present == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("perfect detection keeps the observation in sync with the truth") {
  EnvConfig cfg = base_config(4);
  Env env(cfg);
  Rng rng(9);
  for (int step = 0; step < 60; ++step) {
    const int action = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(action_count(cfg))));
    const Env::StepResult sr = env.step(env.decode_action(action));
    const int n = cfg.num_nodes;
    const auto& compromised = env.state().compromised;
    for (int i = 0; i < n; ++i) {
      CHECK(sr.observation[static_cast<std::size_t>(n * n + 2 * n + i)] ==
            (compromised[i] ? 1.0 : 0.0));
    }
    if (sr.done) env.reset();
  }
}

TEST_CASE("restore-entry confines red to the entry node") {
  EnvConfig cfg = base_config(5);
  Env env(cfg);
  std::vector<double> obs = env.observation();
  for (int step = 0; step < 100; ++step) {
    const BlueAction action = oracle_select_action(
        OraclePolicyKind::RestoreEntry, obs, cfg.num_nodes, cfg.entry_node,
        cfg.action_space);
    Env::StepResult sr = env.step(action);
    CHECK(count_set(sr.trace.compromised_union) <= 1);
    if (count_set(sr.trace.compromised_union) == 1) {
      CHECK(sr.trace.compromised_union[0] == 1);
    }
    obs = std::move(sr.observation);
  }
}

TEST_CASE("same seed and same actions give identical traces") {
  EnvConfig cfg = base_config(4);
  cfg.rng_seed = 77;
  Env a(cfg);
  Env b(cfg);
  Rng actions(3);
  std::ostringstream ta;
  std::ostringstream tb;
  for (int step = 0; step < 100; ++step) {
    const int action = static_cast<int>(
        actions.uniform_int(static_cast<std::uint64_t>(action_count(cfg))));
    write_trace(ta, a.step(a.decode_action(action)).trace);
    write_trace(tb, b.step(b.decode_action(action)).trace);
  }
  CHECK(ta.str() == tb.str());
  CHECK(a.done());
  CHECK(b.done());
}

TEST_CASE("episode termination and restart") {
  EnvConfig cfg = base_config(2);
  cfg.episode_length = 3;
  cfg.red_attack_prob = 1.0;
  Env env(cfg);
  CHECK_FALSE(env.step(BlueAction::scan()).done);
  CHECK_FALSE(env.step(BlueAction::scan()).done);
  CHECK(env.step(BlueAction::scan()).done);
  CHECK_THROWS_AS(env.step(BlueAction::scan()), EpisodeFinished);

  const std::vector<double> obs = env.reset();
  const int n = cfg.num_nodes;
  for (int i = 0; i < n; ++i) {
    CHECK(obs[static_cast<std::size_t>(n * n + 2 * n + i)] == 0.0);
  }
  CHECK_FALSE(env.done());
}

TEST_CASE("illegal blue actions are rejected at the step boundary") {
  Env env(base_config(2));
  CHECK_THROWS_AS(env.step(BlueAction::place_decoy(0)), IllegalAction);
  CHECK_THROWS_AS(env.step(BlueAction::restore(5)), IllegalAction);
  CHECK_THROWS_AS(env.step(BlueAction::restore(-1)), IllegalAction);
  // the failed steps must not have consumed the step counter
  CHECK(env.state().step_index == 0);
}

TEST_CASE("compromise masks render with node 0 as the low bit") {
  CHECK(compromised_hex({}) == "0");
  CHECK(compromised_hex({0, 0}) == "0");
  CHECK(compromised_hex({1, 0}) == "1");
  CHECK(compromised_hex({1, 0, 0, 1}) == "9");
  CHECK(compromised_hex({0, 0, 0, 0, 0, 0, 0, 1}) == "80");
  CHECK(compromised_hex({1, 1, 1, 1, 1, 1, 1, 1, 1}) == "1ff");
}

TEST_CASE("trace export is line-per-snapshot with actor, action, and mask") {
  EnvConfig cfg = base_config(2);
  cfg.red_attack_prob = 1.0;
  Env env(cfg);
  std::ostringstream out;
  write_trace(out, env.step(BlueAction::restore(0)).trace);
  CHECK(out.str() == "0 red basic-attack:0 1\n0 blue restore:0 0\n");

  std::ostringstream out2;
  write_trace(out2, env.step(BlueAction::scan()).trace);
  CHECK(out2.str() == "1 red basic-attack:0 1\n1 blue scan 1\n");
}

TEST_CASE("config text round-trips through the parser") {
  EnvConfig cfg = base_config(7);
  cfg.entry_node = 2;
  cfg.agent_order = AgentOrder::BlueThenRed;
  cfg.action_space = ActionSpace::Extended;
  cfg.episode_length = 42;
  cfg.red_attack_prob = 0.625;
  cfg.detection_prob = 0.5;
  cfg.decoy_lifetime = DecoyLifetime::UntilConsumed;
  cfg.red_target_mode = RedTargetMode::UniformCandidate;
  cfg.reward_function = RewardFunctionKind::Dense;
  cfg.rng_seed = 123456789ULL;

  const EnvConfig parsed = env_config_from_text(env_config_to_text(cfg));
  CHECK(env_config_to_text(parsed) == env_config_to_text(cfg));
}

TEST_CASE("config parser rejects unknown keys and bad enum spellings") {
  CHECK_THROWS_AS(env_config_from_text("numnodes = 4\n"), ConfigError);
  CHECK_THROWS_AS(env_config_from_text("agent_order = redthenblue\n"),
                  InvalidConfig);
  CHECK_THROWS_AS(env_config_from_text("num_nodes = 1\n"), InvalidConfig);
}

}  // TEST_SUITE
