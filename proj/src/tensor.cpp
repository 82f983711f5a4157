#include "zpr/tensor.hpp"

#include <cmath>
#include <sstream>

#include "zpr/param_store.hpp"
#include "zpr/rng.hpp"

namespace zpr {

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::string RngStream::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

RngStream RngStream::deserialize(const std::string& state) {
  RngStream rng;
  std::istringstream is(state);
  is >> rng.engine_;
  if (!is) throw std::invalid_argument("malformed rng state");
  return rng;
}

std::size_t ParamStore::add(const std::string& name, Tensor shape_like, bool is_bias) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
  Param p;
  p.name = name;
  shape_like.zero();
  p.value = shape_like;
  p.grad = shape_like;
  p.accum = std::move(shape_like);
  p.is_bias = is_bias;
  params_.push_back(std::move(p));
  by_name_[name] = params_.size() - 1;
  return params_.size() - 1;
}

std::size_t ParamStore::index(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p.grad.zero();
}

std::vector<Tensor> ParamStore::grads() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.grad);
  return out;
}

void ParamStore::init_uniform(RngStream& rng, double scale) {
  for (auto& p : params_) {
    if (p.is_bias) {
      p.value.zero();
      continue;
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-scale, scale);
  }
}

bool ParamStore::values_equal(const ParamStore& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (params_[i].name != other.params_[i].name) return false;
    if (!(params_[i].value == other.params_[i].value)) return false;
  }
  return true;
}

}  // namespace zpr
