#include "zpr/agent.hpp"

namespace zpr {

PoolResult pool_antecedents(std::span<const Vector> memory, std::size_t d) {
  PoolResult r;
  r.vec.assign(2 * d, 0.0);
  r.argmax.assign(d, 0);
  r.count = memory.size();
  if (memory.empty()) return r;
  for (const auto& v : memory) {
    if (v.size() != d) throw DimensionError("pool_antecedents: stored vector has wrong dimension");
  }
  for (std::size_t k = 0; k < d; ++k) {
    double best = memory[0][k];
    double sum = 0.0;
    for (std::size_t j = 0; j < memory.size(); ++j) {
      const double x = memory[j][k];
      if (x > best) {
        best = x;
        r.argmax[k] = j;
      }
      sum += x;
    }
    r.vec[k] = best;
    r.vec[d + k] = sum / static_cast<double>(memory.size());
  }
  return r;
}

std::vector<Vector> pool_antecedents_backward(const PoolResult& pooled, std::span<const double> d_out) {
  const std::size_t d = pooled.argmax.size();
  if (d_out.size() != 2 * d) throw DimensionError("pool_antecedents_backward: gradient size");
  std::vector<Vector> grads(pooled.count, Vector(d, 0.0));
  if (pooled.count == 0) return grads;
  const double share = 1.0 / static_cast<double>(pooled.count);
  for (std::size_t k = 0; k < d; ++k) {
    grads[pooled.argmax[k]][k] += d_out[k];
    for (auto& g : grads) g[k] += d_out[d + k] * share;
  }
  return grads;
}

Vector assemble_state(const ModelConfig& config, std::span<const double> v_zp, std::span<const double> v_np,
                      std::span<const double> v_ante, std::span<const double> v_feature) {
  if (v_zp.size() != config.d_zp() || v_np.size() != config.d_np() || v_ante.size() != config.d_ante() ||
      v_feature.size() != config.n_features) {
    throw DimensionError("assemble_state: component dimensions do not match the model configuration");
  }
  return concat({v_zp, v_np, v_ante, v_feature});
}

AgentOutput agent_forward(const Model& model, std::span<const double> state, double dropout_rate, RngStream& rng,
                          bool training) {
  const auto& a = model.agent();
  if (state.size() != model.config().d_state()) {
    throw DimensionError("agent_forward: state has " + std::to_string(state.size()) + " entries, expected " +
                         std::to_string(model.config().d_state()));
  }
  AgentOutput out;
  AgentCache& c = out.cache;
  c.param_version = model.params().version();
  c.state.assign(state.begin(), state.end());
  c.h1 = tanh_elem(affine(model.value(a.W1), c.state, model.value(a.b1).span()));
  c.drop1 = dropout(c.h1, dropout_rate, rng, training);
  c.h2 = tanh_elem(affine(model.value(a.W2), c.drop1.out, model.value(a.b2).span()));
  c.drop2 = dropout(c.h2, dropout_rate, rng, training);
  const Vector scores = affine(model.value(a.Ws), c.drop2.out, model.value(a.bs).span());
  c.probs = softmax(scores);
  out.dist = {c.probs[0], c.probs[1]};
  return out;
}

Vector agent_backward(Model& model, const AgentCache& cache, Action action, double coeff) {
  if (cache.param_version != model.params().version()) {
    throw StaleCacheError("agent_backward: cache predates the last parameter update");
  }
  const auto& a = model.agent();
  const auto act = static_cast<std::size_t>(action);
  // d log softmax_a / d scores = onehot(a) - p
  Vector d_scores(2);
  for (std::size_t i = 0; i < 2; ++i) d_scores[i] = coeff * ((i == act ? 1.0 : 0.0) - cache.probs[i]);
  Vector d = affine_backward_into(model.value(a.Ws), cache.drop2.out, d_scores, model.grad(a.Ws), model.grad(a.bs));
  d = tanh_backward(cache.h2, dropout_backward(cache.drop2, d));
  d = affine_backward_into(model.value(a.W2), cache.drop1.out, d, model.grad(a.W2), model.grad(a.b2));
  d = tanh_backward(cache.h1, dropout_backward(cache.drop1, d));
  return affine_backward_into(model.value(a.W1), cache.state, d, model.grad(a.W1), model.grad(a.b1));
}

}  // namespace zpr
