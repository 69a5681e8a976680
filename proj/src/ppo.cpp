#include "redline/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "redline/errors.hpp"
#include "redline/kernels.hpp"
#include "redline/metrics.hpp"

namespace redline {

namespace {

constexpr std::uint64_t kSaltSample = 0x73616d70;
constexpr std::uint64_t kSaltShuffle = 0x73687566;
constexpr std::uint64_t kSaltEvalEnv = 0x6576656e;
constexpr std::uint64_t kSaltEvalAct = 0x65766163;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

void validate(const PpoConfig& config) {
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
    throw InvalidConfig("gamma must be in (0, 1]");
  }
  if (!(config.gae_lambda >= 0.0 && config.gae_lambda <= 1.0)) {
    throw InvalidConfig("gae_lambda must be in [0, 1]");
  }
  if (!(config.clip_epsilon > 0.0)) {
    throw InvalidConfig("clip_epsilon must be > 0");
  }
  if (!(config.learning_rate > 0.0)) {
    throw InvalidConfig("learning_rate must be > 0");
  }
  if (config.rollout_horizon < 1) {
    throw InvalidConfig("rollout_horizon must be >= 1");
  }
  if (config.update_epochs < 1) {
    throw InvalidConfig("update_epochs must be >= 1");
  }
  if (config.minibatch_size < 1) {
    throw InvalidConfig("minibatch_size must be >= 1");
  }
  if (config.rollout_horizon % config.minibatch_size != 0) {
    throw InvalidConfig("rollout_horizon must be divisible by minibatch_size");
  }
  if (config.total_timesteps < 0) {
    throw InvalidConfig("total_timesteps must be >= 0");
  }
  if (config.eval_interval < 1) {
    throw InvalidConfig("eval_interval must be >= 1");
  }
  for (int width : config.hidden_layers) {
    if (width < 1) throw InvalidConfig("hidden layer width must be >= 1");
  }
}

void RolloutBuffer::resize(int horizon_in, int obs_dim_in) {
  horizon = horizon_in;
  obs_dim = obs_dim_in;
  const std::size_t n = static_cast<std::size_t>(horizon);
  observations.assign(n * static_cast<std::size_t>(obs_dim), 0.0);
  actions.assign(n, 0);
  log_probs.assign(n, 0.0);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  dones.assign(n, 0);
  step_penalties.assign(n, 0.0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones,
                      double bootstrap_value, double gamma, double lambda) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw LengthMismatch("rewards/values/dones lengths differ");
  }
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double mask = dones[t] ? 0.0 : 1.0;
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + gamma * mask * next_value - values[t];
    running = delta + gamma * lambda * mask * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

namespace {

struct SampleTerms {
  double policy_loss = 0.0;
  double value_loss = 0.0;  // 0.5 * (v - R)^2, before value_coef
  double entropy = 0.0;
  double new_log_prob = 0.0;
  double ratio = 0.0;
  bool unclipped_active = false;  // min() took the rho * A branch
};

// Shared forward pass + per-sample loss terms for one buffer row.
SampleTerms sample_terms(const PolicyParams& params, const RolloutBuffer& buffer,
                         std::size_t row, const PpoConfig& config,
                         PolicyWorkspace& ws) {
  std::vector<double> obs(buffer.observation(row),
                          buffer.observation(row) + buffer.obs_dim);
  policy_forward(params, obs, ws);

  const int a = buffer.actions[row];
  SampleTerms terms;
  terms.new_log_prob = std::log(ws.probs[static_cast<std::size_t>(a)]);
  terms.ratio = std::exp(terms.new_log_prob - buffer.log_probs[row]);

  const double adv = buffer.advantages[row];
  const double surr1 = terms.ratio * adv;
  const double clipped = std::clamp(terms.ratio, 1.0 - config.clip_epsilon,
                                    1.0 + config.clip_epsilon);
  const double surr2 = clipped * adv;
  terms.unclipped_active = surr1 <= surr2;
  terms.policy_loss = -std::min(surr1, surr2);

  const double v_err = ws.value - buffer.returns[row];
  terms.value_loss = 0.5 * v_err * v_err;

  double entropy = 0.0;
  for (double p : ws.probs) {
    if (p > 0.0) entropy -= p * std::log(p);
  }
  terms.entropy = entropy;
  return terms;
}

}  // namespace

double ppo_loss(const PolicyParams& params, const RolloutBuffer& buffer,
                const std::size_t* index, std::size_t count,
                const PpoConfig& config) {
  PolicyWorkspace ws;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const SampleTerms terms = sample_terms(params, buffer, index[i], config, ws);
    total += terms.policy_loss + config.value_coef * terms.value_loss -
             config.entropy_coef * terms.entropy;
  }
  return total / static_cast<double>(count);
}

double ppo_loss_grad(const PolicyParams& params, const RolloutBuffer& buffer,
                     const std::size_t* index, std::size_t count,
                     const PpoConfig& config, std::vector<double>& grad,
                     UpdateStats* stats) {
  const PolicyLayout layout =
      policy_layout(params.obs_dim, params.action_count, params.hidden);
  grad.assign(layout.total, 0.0);

  PolicyWorkspace ws;
  PolicyWorkspace scratch;
  std::vector<double> dlogits(static_cast<std::size_t>(params.action_count));
  const double inv_count = 1.0 / static_cast<double>(count);

  double loss = 0.0;
  UpdateStats acc;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row = index[i];
    const SampleTerms terms = sample_terms(params, buffer, row, config, ws);
    loss += (terms.policy_loss + config.value_coef * terms.value_loss -
             config.entropy_coef * terms.entropy) *
            inv_count;

    acc.policy_loss += terms.policy_loss * inv_count;
    acc.value_loss += terms.value_loss * inv_count;
    acc.entropy += terms.entropy * inv_count;
    acc.approx_kl += (buffer.log_probs[row] - terms.new_log_prob) * inv_count;
    if (std::abs(terms.ratio - 1.0) > config.clip_epsilon) {
      acc.clip_fraction += inv_count;
    }

    // d(policy_loss)/d(log pi(a)) is -A * rho on the unclipped branch and 0
    // on the clipped one; d(log pi(a))/d(logit_j) = 1{j=a} - p_j.
    const double dlogp = terms.unclipped_active
                             ? -buffer.advantages[row] * terms.ratio
                             : 0.0;
    const int a = buffer.actions[row];
    for (int j = 0; j < params.action_count; ++j) {
      const double indicator = j == a ? 1.0 : 0.0;
      const double p = ws.probs[static_cast<std::size_t>(j)];
      double d = dlogp * (indicator - p);
      if (config.entropy_coef != 0.0 && p > 0.0) {
        // loss has -entropy_coef * H; dH/dlogit_j = -p_j (log p_j + H)
        d += config.entropy_coef * p * (std::log(p) + terms.entropy);
      }
      dlogits[static_cast<std::size_t>(j)] = d * inv_count;
    }
    const double dvalue =
        config.value_coef * (ws.value - buffer.returns[row]) * inv_count;
    policy_backward(params, ws, dlogits, dvalue, grad, scratch);
  }

  if (stats != nullptr) {
    acc.loss = loss;
    *stats = acc;
  }
  return loss;
}

void AdamState::reset(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void adam_update(PolicyParams& params, const std::vector<double>& grad,
                 AdamState& state, double learning_rate) {
  if (state.m.size() != params.flat.size()) {
    state.reset(params.flat.size());
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  kernels::ops().adam_step(params.flat.data(), grad.data(), state.m.data(),
                           state.v.data(), params.flat.size(), learning_rate,
                           kAdamBeta1, kAdamBeta2, kAdamEps, c1, c2);
}

UpdateStats ppo_update(PolicyParams& params, RolloutBuffer& buffer,
                       const PpoConfig& config, AdamState& adam, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(buffer.horizon);

  // Normalize advantages over the whole buffer (population variance).
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += buffer.advantages[t];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = buffer.advantages[t] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (std::size_t t = 0; t < n; ++t) {
    buffer.advantages[t] = (buffer.advantages[t] - mean) * inv_std;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad;

  UpdateStats total;
  std::size_t minibatches = 0;
  for (int epoch = 0; epoch < config.update_epochs; ++epoch) {
    rng.shuffle(order.data(), order.size());
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t count = std::min(
          static_cast<std::size_t>(config.minibatch_size), n - start);
      UpdateStats stats;
      const double loss = ppo_loss_grad(params, buffer, order.data() + start,
                                        count, config, grad, &stats);
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("loss became non-finite during update");
      }
      adam_update(params, grad, adam, config.learning_rate);
      total.loss += stats.loss;
      total.policy_loss += stats.policy_loss;
      total.value_loss += stats.value_loss;
      total.entropy += stats.entropy;
      total.approx_kl += stats.approx_kl;
      total.clip_fraction += stats.clip_fraction;
      ++minibatches;
    }
  }
  const double inv = 1.0 / static_cast<double>(minibatches);
  total.loss *= inv;
  total.policy_loss *= inv;
  total.value_loss *= inv;
  total.entropy *= inv;
  total.approx_kl *= inv;
  total.clip_fraction *= inv;
  return total;
}

namespace {

// Running episode statistics for curve logging.
struct EpisodeWindow {
  double reward_sum = 0.0;
  double penalty_sum = 0.0;
  int steps = 0;

  double window_reward_total = 0.0;
  double window_score_total = 0.0;
  int window_episodes = 0;

  double last_reward_point = 0.0;
  double last_score_point = 0.0;

  void on_step(double reward, double penalty) {
    reward_sum += reward;
    penalty_sum += penalty;
    ++steps;
  }

  void on_episode_end() {
    window_reward_total += reward_sum;
    window_score_total += penalty_sum / static_cast<double>(steps);
    ++window_episodes;
    reward_sum = 0.0;
    penalty_sum = 0.0;
    steps = 0;
  }

  // Mean over episodes completed in this window; previous point's values
  // carry forward when the window is empty.
  void emit(std::int64_t t, TrainingCurve& curve,
            const CurvePointCallback& on_point) {
    if (window_episodes > 0) {
      last_reward_point =
          window_reward_total / static_cast<double>(window_episodes);
      last_score_point =
          window_score_total / static_cast<double>(window_episodes);
    }
    curve.timesteps.push_back(t);
    curve.episodic_reward.push_back(last_reward_point);
    curve.ground_truth_score.push_back(last_score_point);
    if (on_point) on_point(t, last_reward_point, last_score_point);
    window_reward_total = 0.0;
    window_score_total = 0.0;
    window_episodes = 0;
  }
};

}  // namespace

TrainResult train(const EnvConfig& env_config, const PpoConfig& ppo_config,
                  const CurvePointCallback& on_point) {
  validate(env_config);
  validate(ppo_config);

  Env env(env_config);
  const int obs_dim = env.observation_size();
  const int actions = action_count(env_config);

  TrainResult result;
  result.params = init_policy(obs_dim, actions, ppo_config.hidden_layers,
                              ppo_config.seed);

  const std::int64_t iterations =
      ppo_config.total_timesteps / ppo_config.rollout_horizon;
  if (iterations == 0) return result;

  Rng sample_rng(derive_seed(ppo_config.seed, kSaltSample));
  Rng shuffle_rng(derive_seed(ppo_config.seed, kSaltShuffle));
  AdamState adam;
  adam.reset(result.params.flat.size());

  RolloutBuffer buffer;
  buffer.resize(ppo_config.rollout_horizon, obs_dim);

  PolicyWorkspace ws;
  EpisodeWindow window;
  std::vector<double> obs = env.observation();
  std::int64_t global_t = 0;

  for (std::int64_t iter = 0; iter < iterations; ++iter) {
    for (int t = 0; t < ppo_config.rollout_horizon; ++t) {
      const ActionSample sample =
          sample_action(result.params, obs, sample_rng, ws);
      Env::StepResult sr = env.step(env.decode_action(sample.action));
      const double penalty = step_ground_truth_penalty(sr.trace);

      std::copy(obs.begin(), obs.end(),
                buffer.observations.begin() +
                    static_cast<std::size_t>(t) *
                        static_cast<std::size_t>(obs_dim));
      buffer.actions[static_cast<std::size_t>(t)] = sample.action;
      buffer.log_probs[static_cast<std::size_t>(t)] = sample.log_prob;
      buffer.rewards[static_cast<std::size_t>(t)] = sr.reward;
      buffer.values[static_cast<std::size_t>(t)] = sample.value;
      buffer.dones[static_cast<std::size_t>(t)] = sr.done ? 1 : 0;
      buffer.step_penalties[static_cast<std::size_t>(t)] = penalty;

      window.on_step(sr.reward, penalty);
      if (sr.done) {
        window.on_episode_end();
        obs = env.reset();
      } else {
        obs = std::move(sr.observation);
      }

      ++global_t;
      if (global_t % ppo_config.eval_interval == 0) {
        window.emit(global_t, result.curve, on_point);
      }
    }

    double bootstrap = 0.0;
    if (!buffer.dones[static_cast<std::size_t>(buffer.horizon - 1)]) {
      policy_forward(result.params, obs, ws);
      bootstrap = ws.value;
    }
    GaeResult gae =
        compute_gae(buffer.rewards, buffer.values, buffer.dones, bootstrap,
                    ppo_config.gamma, ppo_config.gae_lambda);
    buffer.advantages = std::move(gae.advantages);
    buffer.returns = std::move(gae.returns);

    ppo_update(result.params, buffer, ppo_config, adam, shuffle_rng);
  }

  result.timesteps = global_t;
  return result;
}

EvaluationSummary evaluate_policy(const PolicyParams& params,
                                  const EnvConfig& env_config, int episodes,
                                  bool deterministic) {
  EnvConfig cfg = env_config;
  cfg.rng_seed = derive_seed(env_config.rng_seed, kSaltEvalEnv);
  Env env(cfg);
  Rng act_rng(derive_seed(env_config.rng_seed, kSaltEvalAct));

  PolicyWorkspace ws;
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
      const int action =
          deterministic ? argmax_action(params, obs, ws)
                        : sample_action(params, obs, act_rng, ws).action;
      Env::StepResult sr = env.step(env.decode_action(action));
      reward_sum += sr.reward;
      penalty_sum += step_ground_truth_penalty(sr.trace);
      ++steps;
      if (sr.done) break;
      obs = std::move(sr.observation);
    }
    scores.push_back(penalty_sum / static_cast<double>(steps));
    rewards.push_back(reward_sum);
  }

  auto mean_se = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double se =
        xs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    return std::pair<double, double>{mean, se};
  };

  EvaluationSummary summary;
  summary.episodes = episodes;
  auto [gt_mean, gt_se] = mean_se(scores);
  auto [rw_mean, rw_se] = mean_se(rewards);
  summary.ground_truth_mean = gt_mean;
  summary.ground_truth_se = gt_se;
  summary.episodic_reward_mean = rw_mean;
  summary.episodic_reward_se = rw_se;
  return summary;
}

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const EnvConfig& env_config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);

  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_raw(out, static_cast<std::int32_t>(params.obs_dim));
  write_raw(out, static_cast<std::int32_t>(params.action_count));
  write_raw(out, static_cast<std::uint32_t>(params.hidden.size()));
  for (int width : params.hidden) {
    write_raw(out, static_cast<std::int32_t>(width));
  }
  write_raw(out, static_cast<std::uint64_t>(params.init_seed));

  const std::string config_text = env_config_to_text(env_config);
  write_raw(out, static_cast<std::uint64_t>(config_text.size()));
  out.write(config_text.data(),
            static_cast<std::streamsize>(config_text.size()));

  write_raw(out, static_cast<std::uint64_t>(params.flat.size()));
  out.write(reinterpret_cast<const char*>(params.flat.data()),
            static_cast<std::streamsize>(params.flat.size() * sizeof(double)));
  if (!out) throw IoError("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }

  Checkpoint ckpt;
  std::int32_t obs_dim = 0;
  std::int32_t actions = 0;
  std::uint32_t hidden_count = 0;
  read_raw(in, obs_dim);
  read_raw(in, actions);
  read_raw(in, hidden_count);
  if (!in || hidden_count > 64) throw IoError("corrupt checkpoint header");
  ckpt.params.obs_dim = obs_dim;
  ckpt.params.action_count = actions;
  ckpt.params.hidden.resize(hidden_count);
  for (std::uint32_t i = 0; i < hidden_count; ++i) {
    std::int32_t width = 0;
    read_raw(in, width);
    ckpt.params.hidden[i] = width;
  }
  std::uint64_t init_seed = 0;
  read_raw(in, init_seed);
  ckpt.params.init_seed = init_seed;

  std::uint64_t config_len = 0;
  read_raw(in, config_len);
  if (!in || config_len > (1u << 20)) throw IoError("corrupt checkpoint header");
  std::string config_text(config_len, '\0');
  in.read(config_text.data(), static_cast<std::streamsize>(config_len));
  ckpt.env_config = env_config_from_text(config_text);

  std::uint64_t param_count = 0;
  read_raw(in, param_count);
  const PolicyLayout layout = policy_layout(
      ckpt.params.obs_dim, ckpt.params.action_count, ckpt.params.hidden);
  if (!in || param_count != layout.total) {
    throw IoError("checkpoint parameter count does not match its header");
  }
  ckpt.params.flat.resize(param_count);
  in.read(reinterpret_cast<char*>(ckpt.params.flat.data()),
          static_cast<std::streamsize>(param_count * sizeof(double)));
  if (!in) throw IoError("short read from checkpoint: " + path);
  return ckpt;
}

}  // namespace redline
