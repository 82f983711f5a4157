#include "zpr/model.hpp"

#include <stdexcept>

namespace zpr {

void ModelConfig::validate() const {
  if (vocab_size == 0) throw std::invalid_argument("model: vocab_size must be positive");
  if (d_emb == 0 || d_hidden == 0 || hidden1 == 0 || hidden2 == 0) {
    throw std::invalid_argument("model: dimensions must be positive");
  }
  if (n_features != kNumFeatures) throw std::invalid_argument("model: feature count mismatch");
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  embedding_ = params_.add("embedding", Tensor(config.vocab_size, config.d_emb));
  zp_pre_ = add_cell("zp_pre");
  zp_post_ = add_cell("zp_post");
  np_cell_ = add_cell("np");
  agent_.W1 = params_.add("agent.W1", Tensor(config.hidden1, config.d_state()));
  agent_.b1 = params_.add("agent.b1", Tensor(config.hidden1), true);
  agent_.W2 = params_.add("agent.W2", Tensor(config.hidden2, config.hidden1));
  agent_.b2 = params_.add("agent.b2", Tensor(config.hidden2), true);
  agent_.Ws = params_.add("agent.Ws", Tensor(2, config.hidden2));
  agent_.bs = params_.add("agent.bs", Tensor(2), true);
}

RnnCellRef Model::add_cell(const std::string& prefix) {
  RnnCellRef c;
  c.Wx = params_.add(prefix + ".Wx", Tensor(config_.d_hidden, config_.d_emb));
  c.Wh = params_.add(prefix + ".Wh", Tensor(config_.d_hidden, config_.d_hidden));
  c.b = params_.add(prefix + ".b", Tensor(config_.d_hidden), true);
  return c;
}

Model Model::initialized(const ModelConfig& config, RngStream& rng) {
  Model m(config);
  m.params_.init_uniform(rng, kInitScale);
  return m;
}

}  // namespace zpr
