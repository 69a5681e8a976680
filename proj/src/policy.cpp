#include "redline/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "redline/errors.hpp"
#include "redline/kernels.hpp"

namespace redline {

PolicyLayout policy_layout(int obs_dim, int action_count,
                           const std::vector<int>& hidden) {
  PolicyLayout layout;
  std::size_t offset = 0;
  auto add_layer = [&](int in, int out) {
    LayerSpan span;
    span.in = in;
    span.out = out;
    span.w_offset = offset;
    offset += static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
    span.b_offset = offset;
    offset += static_cast<std::size_t>(out);
    return span;
  };
  int in = obs_dim;
  for (int width : hidden) {
    layout.trunk.push_back(add_layer(in, width));
    in = width;
  }
  layout.logits = add_layer(in, action_count);
  layout.value = add_layer(in, 1);
  layout.total = offset;
  return layout;
}

namespace {

// Orthonormalize k vectors of length m (rows of `rows`) by modified
// Gram-Schmidt, re-drawing a vector on a degenerate norm.
void gram_schmidt(std::vector<std::vector<double>>& rows, Rng& rng) {
  const auto& k = kernels::ops();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int attempt = 0;; ++attempt) {
      for (std::size_t j = 0; j < i; ++j) {
        const double proj = k.dot(rows[i].data(), rows[j].data(), rows[i].size());
        k.axpy(-proj, rows[j].data(), rows[i].data(), rows[i].size());
      }
      const double norm =
          std::sqrt(k.dot(rows[i].data(), rows[i].data(), rows[i].size()));
      if (norm > 1e-12) {
        for (double& x : rows[i]) x /= norm;
        break;
      }
      for (double& x : rows[i]) x = rng.normal();  // degenerate draw; retry
      if (attempt > 16) throw BadDimensions("orthogonal init failed");
    }
  }
}

void orthogonal_fill(double* w, int out, int in, double gain, Rng& rng) {
  const bool wide = out <= in;  // orthonormal rows if wide, columns otherwise
  const std::size_t vectors = static_cast<std::size_t>(wide ? out : in);
  const std::size_t length = static_cast<std::size_t>(wide ? in : out);
  std::vector<std::vector<double>> q(vectors, std::vector<double>(length));
  for (auto& row : q) {
    for (double& x : row) x = rng.normal();
  }
  gram_schmidt(q, rng);
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) {
      const double v = wide ? q[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                            : q[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
      w[static_cast<std::size_t>(r) * static_cast<std::size_t>(in) +
        static_cast<std::size_t>(c)] = gain * v;
    }
  }
}

}  // namespace

PolicyParams init_policy(int obs_dim, int action_count,
                         const std::vector<int>& hidden, std::uint64_t seed) {
  if (obs_dim < 1) throw BadDimensions("obs_dim must be >= 1");
  if (action_count < 2) throw BadDimensions("action_count must be >= 2");
  for (int width : hidden) {
    if (width < 1) throw BadDimensions("hidden layer width must be >= 1");
  }

  PolicyParams params;
  params.obs_dim = obs_dim;
  params.action_count = action_count;
  params.hidden = hidden;
  params.init_seed = seed;

  const PolicyLayout layout = policy_layout(obs_dim, action_count, hidden);
  params.flat.assign(layout.total, 0.0);

  Rng rng(derive_seed(seed, 0x706f6c69));
  const double kTrunkGain = std::sqrt(2.0);
  for (const LayerSpan& span : layout.trunk) {
    orthogonal_fill(params.flat.data() + span.w_offset, span.out, span.in,
                    kTrunkGain, rng);
  }
  // Small logits gain keeps the initial policy near uniform.
  orthogonal_fill(params.flat.data() + layout.logits.w_offset,
                  layout.logits.out, layout.logits.in, 0.01, rng);
  orthogonal_fill(params.flat.data() + layout.value.w_offset, layout.value.out,
                  layout.value.in, 1.0, rng);
  return params;
}

namespace {

void ensure_workspace(const PolicyParams& params, PolicyWorkspace& ws) {
  const std::size_t trunk_layers = params.hidden.size();
  if (ws.activations.size() != trunk_layers) ws.activations.resize(trunk_layers);
  for (std::size_t l = 0; l < trunk_layers; ++l) {
    ws.activations[l].resize(static_cast<std::size_t>(params.hidden[l]));
  }
  ws.logits.resize(static_cast<std::size_t>(params.action_count));
  ws.probs.resize(static_cast<std::size_t>(params.action_count));
  std::size_t widest = static_cast<std::size_t>(params.obs_dim);
  for (int w : params.hidden) widest = std::max(widest, static_cast<std::size_t>(w));
  ws.dh.resize(widest);
  ws.dpre.resize(widest);
}

}  // namespace

void policy_forward(const PolicyParams& params, const std::vector<double>& obs,
                    PolicyWorkspace& ws) {
  if (static_cast<int>(obs.size()) != params.obs_dim) {
    throw DimensionMismatch("observation length " + std::to_string(obs.size()) +
                            " != obs_dim " + std::to_string(params.obs_dim));
  }
  ensure_workspace(params, ws);
  ws.input = obs;

  const PolicyLayout layout =
      policy_layout(params.obs_dim, params.action_count, params.hidden);
  const auto& k = kernels::ops();
  const double* x = ws.input.data();
  std::size_t x_len = ws.input.size();
  for (std::size_t l = 0; l < layout.trunk.size(); ++l) {
    const LayerSpan& span = layout.trunk[l];
    double* h = ws.activations[l].data();
    k.matvec(params.flat.data() + span.w_offset, x,
             params.flat.data() + span.b_offset, h,
             static_cast<std::size_t>(span.out), x_len);
    for (int i = 0; i < span.out; ++i) h[i] = std::tanh(h[i]);
    x = h;
    x_len = static_cast<std::size_t>(span.out);
  }
  k.matvec(params.flat.data() + layout.logits.w_offset, x,
           params.flat.data() + layout.logits.b_offset, ws.logits.data(),
           static_cast<std::size_t>(layout.logits.out), x_len);
  double value = 0.0;
  k.matvec(params.flat.data() + layout.value.w_offset, x,
           params.flat.data() + layout.value.b_offset, &value, 1, x_len);
  ws.value = value;

  // stable softmax
  const double max_logit = *std::max_element(ws.logits.begin(), ws.logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < ws.logits.size(); ++i) {
    ws.probs[i] = std::exp(ws.logits[i] - max_logit);
    sum += ws.probs[i];
  }
  for (double& p : ws.probs) p /= sum;
}

void policy_backward(const PolicyParams& params, const PolicyWorkspace& ws,
                     const std::vector<double>& dlogits, double dvalue,
                     std::vector<double>& grad, PolicyWorkspace& scratch) {
  const PolicyLayout layout =
      policy_layout(params.obs_dim, params.action_count, params.hidden);
  if (grad.size() != layout.total) grad.assign(layout.total, 0.0);
  ensure_workspace(params, scratch);

  const auto& k = kernels::ops();
  const std::size_t trunk_layers = layout.trunk.size();
  const double* top =
      trunk_layers == 0 ? ws.input.data() : ws.activations.back().data();
  const std::size_t top_len =
      trunk_layers == 0 ? ws.input.size() : ws.activations.back().size();

  double* dh = scratch.dh.data();
  std::fill(dh, dh + top_len, 0.0);

  // logits head
  k.ger_acc(dlogits.data(), top, grad.data() + layout.logits.w_offset,
            static_cast<std::size_t>(layout.logits.out), top_len);
  k.axpy(1.0, dlogits.data(), grad.data() + layout.logits.b_offset,
         static_cast<std::size_t>(layout.logits.out));
  k.matvec_t_acc(params.flat.data() + layout.logits.w_offset, dlogits.data(),
                 dh, static_cast<std::size_t>(layout.logits.out), top_len);

  // value head
  k.ger_acc(&dvalue, top, grad.data() + layout.value.w_offset, 1, top_len);
  grad[layout.value.b_offset] += dvalue;
  k.matvec_t_acc(params.flat.data() + layout.value.w_offset, &dvalue, dh, 1,
                 top_len);

  // trunk, deepest layer first
  for (std::size_t l = trunk_layers; l-- > 0;) {
    const LayerSpan& span = layout.trunk[l];
    const double* h = ws.activations[l].data();
    double* dpre = scratch.dpre.data();
    for (int i = 0; i < span.out; ++i) {
      dpre[i] = dh[i] * (1.0 - h[i] * h[i]);  // tanh'
    }
    const double* layer_in = l == 0 ? ws.input.data() : ws.activations[l - 1].data();
    const std::size_t in_len = static_cast<std::size_t>(span.in);
    k.ger_acc(dpre, layer_in, grad.data() + span.w_offset,
              static_cast<std::size_t>(span.out), in_len);
    k.axpy(1.0, dpre, grad.data() + span.b_offset,
           static_cast<std::size_t>(span.out));
    if (l > 0) {
      std::fill(dh, dh + in_len, 0.0);
      k.matvec_t_acc(params.flat.data() + span.w_offset, dpre, dh,
                     static_cast<std::size_t>(span.out), in_len);
    }
  }
}

ActionSample sample_action(const PolicyParams& params,
                           const std::vector<double>& obs, Rng& rng,
                           PolicyWorkspace& ws) {
  policy_forward(params, obs, ws);
  const double u = rng.uniform();
  double cdf = 0.0;
  int action = params.action_count - 1;
  for (int i = 0; i < params.action_count; ++i) {
    cdf += ws.probs[static_cast<std::size_t>(i)];
    if (u < cdf) {
      action = i;
      break;
    }
  }
  ActionSample out;
  out.action = action;
  out.log_prob = std::log(ws.probs[static_cast<std::size_t>(action)]);
  out.value = ws.value;
  return out;
}

int argmax_action(const PolicyParams& params, const std::vector<double>& obs,
                  PolicyWorkspace& ws) {
  policy_forward(params, obs, ws);
  return static_cast<int>(std::max_element(ws.logits.begin(), ws.logits.end()) -
                          ws.logits.begin());
}

}  // namespace redline
