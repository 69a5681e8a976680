#ifndef REDLINE_POLICY_HPP_
#define REDLINE_POLICY_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "redline/rng.hpp"

namespace redline {

// Shared-input fully-connected trunk with tanh activations and two linear
// heads: action logits (action_count wide) and state value (width 1).
// All parameters live in one flat vector so gradients, Adam state, and
// finite-difference checks can treat the network as a single vector.
struct PolicyParams {
  int obs_dim = 0;
  int action_count = 0;
  std::vector<int> hidden;
  std::uint64_t init_seed = 0;
  std::vector<double> flat;
};

struct LayerSpan {
  std::size_t w_offset = 0;
  std::size_t b_offset = 0;
  int in = 0;
  int out = 0;
};

// Flat-vector layout: trunk layers in order, then logits head, then value
// head; each layer is W (row-major out x in) followed by b (out).
struct PolicyLayout {
  std::vector<LayerSpan> trunk;
  LayerSpan logits;
  LayerSpan value;
  std::size_t total = 0;
};

PolicyLayout policy_layout(int obs_dim, int action_count,
                           const std::vector<int>& hidden);

// Orthogonal initialization (modified Gram-Schmidt on a Gaussian draw) with
// gain sqrt(2) on trunk layers, 0.01 on the logits head, 1.0 on the value
// head; all biases zero. Identical (obs_dim, action_count, hidden, seed)
// give bit-identical parameters. Throws BadDimensions.
PolicyParams init_policy(int obs_dim, int action_count,
                         const std::vector<int>& hidden, std::uint64_t seed);

// Reusable forward/backward scratch; keeps the rollout loop allocation-free.
struct PolicyWorkspace {
  std::vector<double> input;
  std::vector<std::vector<double>> activations;  // post-tanh per trunk layer
  std::vector<double> logits;
  std::vector<double> probs;
  double value = 0.0;
  std::vector<double> dh;
  std::vector<double> dpre;
};

// Fills ws.logits / ws.probs (stable softmax) / ws.value.
// Throws DimensionMismatch if obs length differs from obs_dim.
void policy_forward(const PolicyParams& params, const std::vector<double>& obs,
                    PolicyWorkspace& ws);

// Backpropagates d(loss)/d(logits) and d(loss)/d(value) for the sample that
// ws currently holds, accumulating into grad (same layout as params.flat).
void policy_backward(const PolicyParams& params, const PolicyWorkspace& ws,
                     const std::vector<double>& dlogits, double dvalue,
                     std::vector<double>& grad, PolicyWorkspace& scratch);

// Categorical sample from the current policy.
struct ActionSample {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};
ActionSample sample_action(const PolicyParams& params,
                           const std::vector<double>& obs, Rng& rng,
                           PolicyWorkspace& ws);

// Greedy action (argmax of the logits).
int argmax_action(const PolicyParams& params, const std::vector<double>& obs,
                  PolicyWorkspace& ws);

}  // namespace redline

#endif  // REDLINE_POLICY_HPP_
