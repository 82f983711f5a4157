#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zpr/corpus.hpp"
#include "zpr/model.hpp"

namespace zpr {

// A one-instance corpus with exactly `n_candidates` candidates and a small
// model whose weights are drawn wider than the training init so that the
// policy is far from uniform.
struct OracleFixture {
  Corpus corpus;
  Model model;

  const ZpInstance& instance() const { return corpus.instances.front(); }
  const Document& document() const { return corpus.document_of(instance()); }
};

OracleFixture make_oracle_fixture(std::uint64_t seed, int n_candidates, double init_scale = 0.5);

// Each returns the largest per-parameter-group relative error between the
// analytic gradient and central differences with step `eps`. With
// `wrong_sign` the analytic gradient is negated before comparison.
double check_agent_gradient(OracleFixture& fx, double eps, bool wrong_sign = false);
double check_pretrain_gradient(OracleFixture& fx, double eps, bool wrong_sign = false);
double check_expected_reward_gradient(OracleFixture& fx, double eps, bool wrong_sign = false);

// Per-coordinate sample statistics of the single-episode gradient estimator
// sum_t grad log p(a_t) (R - b_t), flattened in ParamStore order.
struct EstimatorSamples {
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased sample variance
  std::size_t n = 0;
};

EstimatorSamples sample_estimator(const Model& model, const Document& doc, const ZpInstance& zp, bool use_baseline,
                                  std::size_t n_samples, std::uint64_t seed);

std::vector<double> flatten(const std::vector<Tensor>& tensors);

struct OracleOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  int gradient_seeds = 10;
  std::uint64_t seed = 1;
  std::size_t estimator_samples = 50000;
  std::size_t variance_samples = 10000;
  double variance_fraction = 0.95;
  double init_scale = 0.5;
  bool inject_wrong_sign = false;
};

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct OracleReport {
  OracleOptions options;
  std::vector<OracleCheck> checks;

  bool all_pass() const;
  std::string to_table() const;
  std::string to_json() const;
};

// One check per gradient kind, each the worst case over
// options.gradient_seeds fixtures of 2 to 4 candidates.
std::vector<OracleCheck> run_gradient_checks(const OracleOptions& options);
// Monte Carlo mean of the single-episode estimator (with or without the
// per-step baseline) on a 2-candidate fixture versus exact_policy_gradient,
// per coordinate within 3 standard errors.
OracleCheck run_estimator_consistency(const OracleOptions& options, bool use_baseline = true);
// Fraction of coordinates (with nonzero variance) on a 3-candidate fixture
// where the baseline does not increase the sample variance.
OracleCheck run_variance_reduction(const OracleOptions& options);

OracleReport run_oracle_suite(const OracleOptions& options);

}  // namespace zpr
