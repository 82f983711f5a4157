#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zpr/tensor.hpp"

namespace zpr {

class RngStream;

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor accum;  // Adagrad sum of squared gradients
  bool is_bias = false;
};

// Named trainable tensors with paired gradient and Adagrad accumulators.
// Insertion order is the canonical iteration order; it fixes the layout
// of checkpoints and of the flat gradient views used by the oracles.
class ParamStore {
 public:
  std::size_t add(const std::string& name, Tensor shape_like, bool is_bias = false);

  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Param& operator[](const std::string& name) { return params_[index(name)]; }
  const Param& operator[](const std::string& name) const { return params_[index(name)]; }

  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grads();
  std::vector<Tensor> grads() const;

  // Weights uniform in [-scale, scale], biases zero.
  void init_uniform(RngStream& rng, double scale = 0.08);

  // Incremented by every optimizer step; forward caches record it so a
  // backward pass against updated parameters can be rejected.
  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }
  void set_version(std::uint64_t v) { version_ = v; }

  bool values_equal(const ParamStore& other) const;

 private:
  std::vector<Param> params_;
  std::map<std::string, std::size_t> by_name_;
  std::uint64_t version_ = 0;
};

}  // namespace zpr
