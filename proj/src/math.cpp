#include "zpr/math.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace zpr {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMajor>;
using Mat = Eigen::Map<RowMajor>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

ConstVec as_vec(std::span<const double> s) { return ConstVec(s.data(), static_cast<Eigen::Index>(s.size())); }

void check_affine(const Tensor& W, std::size_t x, std::size_t b) {
  if (W.cols() != x || W.rows() != b) {
    throw DimensionError("affine: W" + W.shape_string() + " x(" + std::to_string(x) + ") b(" +
                         std::to_string(b) + ")");
  }
}

}  // namespace

Vector affine(const Tensor& W, std::span<const double> x, std::span<const double> b) {
  check_affine(W, x.size(), b.size());
  Vector out(b.begin(), b.end());
  ConstMat w(W.data(), static_cast<Eigen::Index>(W.rows()), static_cast<Eigen::Index>(W.cols()));
  Vec(out.data(), static_cast<Eigen::Index>(out.size())).noalias() += w * as_vec(x);
  return out;
}

Vector affine_backward_into(const Tensor& W, std::span<const double> x,
                            std::span<const double> d_out, Tensor& dW, Tensor& db) {
  check_affine(W, x.size(), d_out.size());
  if (!dW.same_shape(W) || db.size() != d_out.size()) throw DimensionError("affine_backward: grad shapes");
  const auto rows = static_cast<Eigen::Index>(W.rows());
  const auto cols = static_cast<Eigen::Index>(W.cols());
  ConstMat w(W.data(), rows, cols);
  Mat dw(dW.data(), rows, cols);
  dw.noalias() += as_vec(d_out) * as_vec(x).transpose();
  Vec(db.data(), rows) += as_vec(d_out);
  Vector dx(W.cols(), 0.0);
  Vec(dx.data(), cols).noalias() = w.transpose() * as_vec(d_out);
  return dx;
}

AffineGrads affine_backward(const Tensor& W, std::span<const double> x,
                            std::span<const double> d_out) {
  AffineGrads g;
  g.dW = Tensor(W.rows(), W.cols());
  Tensor db(W.rows());
  g.dx = affine_backward_into(W, x, d_out, g.dW, db);
  g.db = db.values();
  return g;
}

Vector tanh_elem(std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

Vector tanh_backward(std::span<const double> out, std::span<const double> d_out) {
  if (out.size() != d_out.size()) throw DimensionError("tanh_backward: size mismatch");
  Vector d_in(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) d_in[i] = d_out[i] * (1.0 - out[i] * out[i]);
  return d_in;
}

Vector softmax(std::span<const double> scores) {
  if (scores.empty()) return {};
  double hi = scores[0];
  for (double s : scores) hi = std::max(hi, s);
  Vector p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

DropoutResult dropout(std::span<const double> x, double rate, RngStream& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  DropoutResult r;
  r.out.assign(x.begin(), x.end());
  r.mask.assign(x.size(), 1.0);
  if (!training || rate == 0.0) return r;
  r.scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform() < rate) {
      r.mask[i] = 0.0;
      r.out[i] = 0.0;
    } else {
      r.out[i] = x[i] * r.scale;
    }
  }
  return r;
}

Vector dropout_backward(const DropoutResult& fwd, std::span<const double> d_out) {
  if (d_out.size() != fwd.mask.size()) throw DimensionError("dropout_backward: size mismatch");
  Vector d_in(d_out.size());
  for (std::size_t i = 0; i < d_out.size(); ++i) d_in[i] = d_out[i] * fwd.mask[i] * fwd.scale;
  return d_in;
}

void adagrad_step(ParamStore& store, double lr, double epsilon) {
  for (auto& p : store) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      if (g == 0.0) continue;
      p.accum[i] += g * g;
      p.value[i] -= lr * g / (std::sqrt(p.accum[i]) + epsilon);
    }
    p.grad.zero();
  }
  store.bump_version();
}

std::vector<Tensor> finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                                     ParamStore& store, double eps) {
  std::vector<Tensor> out;
  out.reserve(store.size());
  for (auto& p : store) {
    Tensor g = p.value;
    g.zero();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = f(store);
      p.value[i] = saved - eps;
      const double down = f(store);
      p.value[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("finite_diff_grad: non-finite objective at " + p.name);
      }
      g[i] = (up - down) / (2.0 * eps);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw DimensionError("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom < floor) return std::sqrt(diff) < floor ? 0.0 : std::sqrt(diff) / floor;
  return std::sqrt(diff) / denom;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  return as_vec(a).dot(as_vec(b));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector concat(std::initializer_list<std::span<const double>> parts) {
  Vector out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace zpr
