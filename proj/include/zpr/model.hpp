#pragma once

#include <cstdint>

#include "zpr/features.hpp"
#include "zpr/param_store.hpp"
#include "zpr/rng.hpp"

namespace zpr {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_emb = 100;
  std::size_t d_hidden = 100;  // both encoders
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 512;
  std::size_t n_features = kNumFeatures;

  std::size_t d_zp() const { return 2 * d_hidden; }
  std::size_t d_np() const { return d_hidden; }
  std::size_t d_ante() const { return 2 * d_hidden; }
  std::size_t d_state() const { return d_zp() + d_np() + d_ante() + n_features; }

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct RnnCellRef {
  std::size_t Wx = 0;
  std::size_t Wh = 0;
  std::size_t b = 0;
};

struct AgentRef {
  std::size_t W1 = 0, b1 = 0, W2 = 0, b2 = 0, Ws = 0, bs = 0;
};

// All trainable state of the resolver: the embedding table, the three
// recurrent cells and the policy network.
class Model {
 public:
  Model() = default;
  explicit Model(const ModelConfig& config);

  // Fresh parameters: weights uniform in [-0.08, 0.08], biases zero.
  static Model initialized(const ModelConfig& config, RngStream& rng);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::size_t embedding() const { return embedding_; }
  const RnnCellRef& zp_pre() const { return zp_pre_; }
  const RnnCellRef& zp_post() const { return zp_post_; }
  const RnnCellRef& np_cell() const { return np_cell_; }
  const AgentRef& agent() const { return agent_; }

  const Tensor& value(std::size_t i) const { return params_[i].value; }
  Tensor& grad(std::size_t i) { return params_[i].grad; }

 private:
  RnnCellRef add_cell(const std::string& prefix);

  ModelConfig config_;
  ParamStore params_;
  std::size_t embedding_ = 0;
  RnnCellRef zp_pre_, zp_post_, np_cell_;
  AgentRef agent_;
};

inline constexpr double kInitScale = 0.08;

}  // namespace zpr
