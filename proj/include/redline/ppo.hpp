#ifndef REDLINE_PPO_HPP_
#define REDLINE_PPO_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "redline/env.hpp"
#include "redline/policy.hpp"

namespace redline {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  int rollout_horizon = 2048;
  int update_epochs = 10;
  int minibatch_size = 64;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  std::vector<int> hidden_layers = {64, 64};
  std::int64_t total_timesteps = 1'000'000;
  std::int64_t eval_interval = 10'000;
  std::uint64_t seed = 0;
};

// Throws InvalidConfig. Requires 0 < gamma <= 1, 0 <= gae_lambda <= 1,
// clip_epsilon > 0, and rollout_horizon divisible by minibatch_size.
void validate(const PpoConfig& config);

// Per-timestep rollout storage, fixed capacity = rollout_horizon.
// step_penalties carries the ground-truth per-step penalty for curve logging.
struct RolloutBuffer {
  int obs_dim = 0;
  int horizon = 0;
  std::vector<double> observations;  // horizon x obs_dim, row-major
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> step_penalties;
  std::vector<double> advantages;
  std::vector<double> returns;

  void resize(int horizon, int obs_dim);
  const double* observation(std::size_t t) const {
    return observations.data() + t * static_cast<std::size_t>(obs_dim);
  }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation with resets at done flags:
//   delta_t = r_t + gamma * (1 - done_t) * v_{t+1} - v_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// where v_T is bootstrap_value. Throws LengthMismatch.
GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones,
                      double bootstrap_value, double gamma, double lambda);

struct UpdateStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Combined PPO loss over the buffer rows listed in index[0..count):
//   mean of  -min(rho*A, clip(rho, 1-eps, 1+eps)*A)
//            + value_coef * 0.5 * (v - return)^2
//            - entropy_coef * H(pi(. | obs))
// using buffer.advantages as-is (normalization is ppo_update's job).
double ppo_loss(const PolicyParams& params, const RolloutBuffer& buffer,
                const std::size_t* index, std::size_t count,
                const PpoConfig& config);

// Analytic gradient of ppo_loss with respect to params.flat; grad is
// resized and overwritten. Returns the loss; fills *stats when non-null.
double ppo_loss_grad(const PolicyParams& params, const RolloutBuffer& buffer,
                     const std::size_t* index, std::size_t count,
                     const PpoConfig& config, std::vector<double>& grad,
                     UpdateStats* stats = nullptr);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  void reset(std::size_t n);
};

// One Adam step (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
void adam_update(PolicyParams& params, const std::vector<double>& grad,
                 AdamState& state, double learning_rate);

// One PPO update over a full buffer: normalizes buffer.advantages in place
// to zero mean / unit variance, then runs update_epochs passes of shuffled
// minibatches with Adam. Returned stats are averaged over all minibatches.
// Throws NonFiniteLoss when the loss stops being finite.
UpdateStats ppo_update(PolicyParams& params, RolloutBuffer& buffer,
                       const PpoConfig& config, AdamState& adam, Rng& rng);

// One training run's curve: point i summarizes the episodes completed in
// the i-th eval_interval window (values carried forward over empty windows).
struct TrainingCurve {
  std::vector<std::int64_t> timesteps;
  std::vector<double> episodic_reward;
  std::vector<double> ground_truth_score;

  std::size_t size() const { return timesteps.size(); }
};

struct TrainResult {
  PolicyParams params;
  TrainingCurve curve;
  std::int64_t timesteps = 0;
};

using CurvePointCallback = std::function<void(
    std::int64_t timesteps, double episodic_reward, double ground_truth_score)>;

// Alternates rollout collection and PPO updates for
// floor(total_timesteps / rollout_horizon) full rollouts, logging a curve
// point at every eval_interval crossing. A pure function of the two configs:
// same inputs give identical curves and parameters. total_timesteps = 0
// returns the freshly initialized parameters and an empty curve.
// Propagates NonFiniteLoss; on_point (optional) sees each curve point as it
// is logged, so a caller can keep the partial curve across that throw.
TrainResult train(const EnvConfig& env_config, const PpoConfig& ppo_config,
                  const CurvePointCallback& on_point = {});

struct EvaluationSummary {
  double ground_truth_mean = 0.0;
  double ground_truth_se = 0.0;
  double episodic_reward_mean = 0.0;
  double episodic_reward_se = 0.0;
  int episodes = 0;
};

// Runs the policy for fresh episodes (argmax actions when deterministic,
// else categorical sampling) and reports means and standard errors. All
// randomness derives from env_config.rng_seed.
EvaluationSummary evaluate_policy(const PolicyParams& params,
                                  const EnvConfig& env_config, int episodes,
                                  bool deterministic = true);

struct Checkpoint {
  PolicyParams params;
  EnvConfig env_config;
};

// Flat binary checkpoint: header (magic, version, obs_dim, action_count,
// hidden widths, init seed), the environment config as key-value text, then
// the raw parameter vector. See docs/formats.md. Throws IoError.
void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const EnvConfig& env_config);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace redline

#endif  // REDLINE_PPO_HPP_
