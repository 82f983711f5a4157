#pragma once

#include <functional>
#include <span>
#include <vector>

#include "zpr/param_store.hpp"
#include "zpr/rng.hpp"
#include "zpr/tensor.hpp"

namespace zpr {

// out = W x + b
Vector affine(const Tensor& W, std::span<const double> x, std::span<const double> b);

struct AffineGrads {
  Tensor dW;
  Vector dx;
  Vector db;
};

AffineGrads affine_backward(const Tensor& W, std::span<const double> x,
                            std::span<const double> d_out);

// Accumulating form used on the hot path: dW += d_out x^T, db += d_out.
// Returns dx = W^T d_out.
Vector affine_backward_into(const Tensor& W, std::span<const double> x,
                            std::span<const double> d_out, Tensor& dW, Tensor& db);

Vector tanh_elem(std::span<const double> x);
// d_in = d_out * (1 - out^2), computed from the forward output.
Vector tanh_backward(std::span<const double> out, std::span<const double> d_out);

// Max-shifted softmax.
Vector softmax(std::span<const double> scores);

struct DropoutResult {
  Vector out;
  Vector mask;  // 1 for kept units, 0 for dropped
  double scale = 1.0;
};

// Inverted dropout: survivors are scaled by 1/(1-rate) while training,
// identity at inference.
DropoutResult dropout(std::span<const double> x, double rate, RngStream& rng, bool training);
Vector dropout_backward(const DropoutResult& fwd, std::span<const double> d_out);

constexpr double kAdagradEpsilon = 1e-8;

// accum += g^2; value -= lr * g / (sqrt(accum) + epsilon); grads zeroed.
void adagrad_step(ParamStore& store, double lr, double epsilon = kAdagradEpsilon);

// Central differences over every scalar of every parameter in `store`.
// `f` must be deterministic in the parameter values.
std::vector<Tensor> finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                                     ParamStore& store, double eps = 1e-5);

// ||a - b|| / max(||a||, ||b||), or 0 when both are below `floor`.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-10);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector concat(std::initializer_list<std::span<const double>> parts);

}  // namespace zpr
