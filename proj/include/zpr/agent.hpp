#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "zpr/math.hpp"
#include "zpr/model.hpp"

namespace zpr {

enum class Action : int { kCorefer = 0, kNonCorefer = 1 };

struct ActionDistribution {
  double p_corefer = 0.5;
  double p_non_corefer = 0.5;

  double prob(Action a) const { return a == Action::kCorefer ? p_corefer : p_non_corefer; }
};

class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PoolResult {
  Vector vec;                        // [max over memory | mean over memory]
  std::vector<std::size_t> argmax;   // memory slot feeding each max coordinate
  std::size_t count = 0;
};

// Max and average pooling over the selected-antecedent vectors. Empty
// memory pools to the zero vector of length 2d.
PoolResult pool_antecedents(std::span<const Vector> memory, std::size_t d);
// Gradient for each memory slot: max coordinates route to the first
// argmax, mean coordinates spread evenly.
std::vector<Vector> pool_antecedents_backward(const PoolResult& pooled, std::span<const double> d_out);

Vector assemble_state(const ModelConfig& config, std::span<const double> v_zp, std::span<const double> v_np,
                      std::span<const double> v_ante, std::span<const double> v_feature);

struct AgentCache {
  Vector state;
  Vector h1;
  DropoutResult drop1;
  Vector h2;
  DropoutResult drop2;
  Vector probs;
  std::uint64_t param_version = 0;
};

struct AgentOutput {
  ActionDistribution dist;
  AgentCache cache;
};

// h1 = tanh(W1 s + b1), h2 = tanh(W2 h1 + b2) with dropout on each layer's
// output while training; scores = Ws h2 + bs (row 0 = corefer).
AgentOutput agent_forward(const Model& model, std::span<const double> state, double dropout_rate, RngStream& rng,
                          bool training);

// Accumulates coeff * d log p(action) into the agent's parameter gradients
// and returns coeff * d log p(action) / d state.
Vector agent_backward(Model& model, const AgentCache& cache, Action action, double coeff);

}  // namespace zpr
