#include "zpr/oracle_suite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "zpr/agent.hpp"
#include "zpr/evaluation.hpp"
#include "zpr/math.hpp"
#include "zpr/training.hpp"

namespace zpr {

namespace {

constexpr double kFixtureDropout = 0.5;

double worst_group_error(const std::vector<Tensor>& analytic, const std::vector<Tensor>& numeric, bool wrong_sign) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    Tensor a = analytic[i];
    if (wrong_sign) {
      for (auto& v : a.span()) v = -v;
    }
    worst = std::max(worst, relative_error(a.span(), numeric[i].span()));
  }
  return worst;
}

}  // namespace

OracleFixture make_oracle_fixture(std::uint64_t seed, int n_candidates, double init_scale) {
  ToyCorpusOptions opt;
  opt.n_docs = 1;
  opt.zps_per_doc = 1;
  opt.min_candidates = opt.max_candidates = n_candidates;
  opt.min_gold = 1;
  opt.max_gold = std::max(1, n_candidates - 1);
  opt.vocab_size = 12;
  opt.n_markers = 2;
  opt.set_dependent_fraction = 0.0;
  opt.seed = seed;
  OracleFixture fx;
  fx.corpus = generate_toy_corpus(opt);

  ModelConfig cfg;
  cfg.vocab_size = fx.corpus.vocabulary.size();
  cfg.d_emb = 4;
  cfg.d_hidden = 3;
  cfg.hidden1 = 5;
  cfg.hidden2 = 4;
  fx.model = Model(cfg);
  RngStream rng(seed ^ 0x9e3779b97f4a7c15ULL);
  fx.model.params().init_uniform(rng, init_scale);
  // Nonzero biases so their gradients are exercised too.
  for (auto& p : fx.model.params()) {
    if (!p.is_bias) continue;
    for (auto& v : p.value.span()) v = rng.uniform(-init_scale, init_scale);
  }
  return fx;
}

double check_agent_gradient(OracleFixture& fx, double eps, bool wrong_sign) {
  Model& model = fx.model;
  RngStream state_rng(fx.corpus.instances.size() * 7919 + model.params().num_scalars());
  Vector state(model.config().d_state());
  for (auto& v : state) v = state_rng.uniform(-1.0, 1.0);
  double worst = 0.0;
  for (Action a : {Action::kCorefer, Action::kNonCorefer}) {
    model.params().zero_grads();
    RngStream drop(11);
    const AgentOutput out = agent_forward(model, state, kFixtureDropout, drop, true);
    agent_backward(model, out.cache, a, 1.0);
    const auto analytic = model.params().grads();
    const auto numeric = finite_diff_grad(
        [&](const ParamStore&) {
          RngStream r(11);
          return std::log(agent_forward(model, state, kFixtureDropout, r, true).dist.prob(a));
        },
        model.params(), eps);
    worst = std::max(worst, worst_group_error(analytic, numeric, wrong_sign));
  }
  model.params().zero_grads();
  return worst;
}

double check_pretrain_gradient(OracleFixture& fx, double eps, bool wrong_sign) {
  Model& model = fx.model;
  const Document& doc = fx.document();
  const ZpInstance& zp = fx.instance();
  double worst = 0.0;
  for (PretrainObjective objective : {PretrainObjective::kGoldActions, PretrainObjective::kGoldOnly}) {
    model.params().zero_grads();
    RngStream drop(23);
    pretrain_loss(model, doc, zp, objective, kFixtureDropout, drop, true);
    const auto analytic = model.params().grads();
    Model scratch = model;
    const auto numeric = finite_diff_grad(
        [&](const ParamStore& store) {
          for (std::size_t i = 0; i < store.size(); ++i) scratch.params()[i].value = store[i].value;
          RngStream r(23);
          return pretrain_loss(scratch, doc, zp, objective, kFixtureDropout, r, true);
        },
        model.params(), eps);
    worst = std::max(worst, worst_group_error(analytic, numeric, wrong_sign));
  }
  model.params().zero_grads();
  return worst;
}

double check_expected_reward_gradient(OracleFixture& fx, double eps, bool wrong_sign) {
  Model& model = fx.model;
  const Document& doc = fx.document();
  const ZpInstance& zp = fx.instance();
  const auto analytic = exact_policy_gradient(model, doc, zp);
  const auto numeric =
      finite_diff_grad([&](const ParamStore&) { return exact_expected_reward(model, doc, zp); }, model.params(), eps);
  return worst_group_error(analytic, numeric, wrong_sign);
}

std::vector<double> flatten(const std::vector<Tensor>& tensors) {
  std::vector<double> out;
  for (const auto& t : tensors) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

EstimatorSamples sample_estimator(const Model& model, const Document& doc, const ZpInstance& zp, bool use_baseline,
                                  std::size_t n_samples, std::uint64_t seed) {
  Model work = model;
  RngStream rng(seed);
  RolloutOptions opt;
  opt.mode = RolloutMode::kSample;
  EstimatorSamples s;
  const std::size_t dim = work.params().num_scalars();
  s.mean.assign(dim, 0.0);
  std::vector<double> m2(dim, 0.0);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Trajectory tr = run_episode(work, doc, zp, opt, rng);
    std::vector<double> coeffs(tr.steps.size(), tr.reward);
    if (use_baseline) {
      const auto b = compute_baselines(tr);
      for (std::size_t t = 0; t < coeffs.size(); ++t) coeffs[t] = tr.reward - b[t];
    }
    work.params().zero_grads();
    backprop_trajectory(work, tr, coeffs);
    // Welford update.
    const double n = static_cast<double>(k + 1);
    std::size_t j = 0;
    for (const auto& p : work.params()) {
      for (double g : p.grad.values()) {
        const double delta = g - s.mean[j];
        s.mean[j] += delta / n;
        m2[j] += delta * (g - s.mean[j]);
        ++j;
      }
    }
  }
  s.n = n_samples;
  s.variance.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) s.variance[j] = n_samples > 1 ? m2[j] / static_cast<double>(n_samples - 1) : 0.0;
  return s;
}

std::vector<OracleCheck> run_gradient_checks(const OracleOptions& options) {
  OracleCheck agent{"grad.agent_logprob", 0.0, options.tol, false, ""};
  OracleCheck pre{"grad.pretrain_loss", 0.0, options.tol, false, ""};
  OracleCheck reward{"grad.expected_reward", 0.0, options.tol, false, ""};
  for (int k = 0; k < options.gradient_seeds; ++k) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(k);
    OracleFixture fx = make_oracle_fixture(seed, 2 + k % 3, options.init_scale);
    agent.value = std::max(agent.value, check_agent_gradient(fx, options.eps, options.inject_wrong_sign));
    pre.value = std::max(pre.value, check_pretrain_gradient(fx, options.eps, options.inject_wrong_sign));
    reward.value =
        std::max(reward.value, check_expected_reward_gradient(fx, options.eps, options.inject_wrong_sign));
  }
  std::vector<OracleCheck> out{agent, pre, reward};
  for (auto& c : out) {
    c.pass = c.value <= c.threshold;
    c.detail = "max relative error over parameter groups, " + std::to_string(options.gradient_seeds) + " seeds";
  }
  return out;
}

OracleCheck run_estimator_consistency(const OracleOptions& options, bool use_baseline) {
  OracleFixture fx = make_oracle_fixture(options.seed, 2, options.init_scale);
  const Document& doc = fx.document();
  const ZpInstance& zp = fx.instance();
  auto exact = flatten(exact_policy_gradient(fx.model, doc, zp));
  if (options.inject_wrong_sign) {
    for (auto& v : exact) v = -v;
  }
  const auto expected = flatten(exact_estimator_mean(fx.model, doc, zp, use_baseline));
  const EstimatorSamples s =
      sample_estimator(fx.model, doc, zp, use_baseline, options.estimator_samples, options.seed + 1000);

  double worst_z = 0.0, worst_bias_z = 0.0;
  bool constant_ok = true;
  for (std::size_t j = 0; j < exact.size(); ++j) {
    const double se = std::sqrt(s.variance[j] / static_cast<double>(s.n));
    const double diff = std::abs(s.mean[j] - exact[j]);
    if (se > 0.0) {
      worst_z = std::max(worst_z, diff / se);
      worst_bias_z = std::max(worst_bias_z, std::abs(expected[j] - exact[j]) / se);
    } else if (diff > 1e-12 * std::max(1.0, std::abs(exact[j]))) {
      constant_ok = false;
    }
  }
  OracleCheck c{use_baseline ? "estimator.consistency" : "estimator.consistency_no_baseline", worst_z, 3.0,
                worst_z <= 3.0 && constant_ok, ""};
  std::ostringstream os;
  os << "max |mean - exact| / SE over " << exact.size() << " coordinates, " << s.n
     << " samples; exact estimator bias / SE = " << std::setprecision(3) << worst_bias_z;
  if (!constant_ok) os << "; zero-variance coordinate mismatch";
  c.detail = os.str();
  return c;
}

OracleCheck run_variance_reduction(const OracleOptions& options) {
  OracleFixture fx = make_oracle_fixture(options.seed, 3, options.init_scale);
  const Document& doc = fx.document();
  const ZpInstance& zp = fx.instance();
  // Same sampling seed: both estimators see the same trajectories.
  const auto with = sample_estimator(fx.model, doc, zp, true, options.variance_samples, options.seed + 2000);
  const auto without = sample_estimator(fx.model, doc, zp, false, options.variance_samples, options.seed + 2000);
  std::size_t counted = 0, reduced = 0;
  for (std::size_t j = 0; j < with.variance.size(); ++j) {
    if (with.variance[j] == 0.0 && without.variance[j] == 0.0) continue;
    ++counted;
    reduced += with.variance[j] <= without.variance[j];
  }
  const double frac = counted ? static_cast<double>(reduced) / static_cast<double>(counted) : 0.0;
  OracleCheck c{"estimator.variance_reduction", frac, options.variance_fraction, frac >= options.variance_fraction, ""};
  c.detail = std::to_string(reduced) + " of " + std::to_string(counted) + " coordinates with nonzero variance, " +
             std::to_string(with.n) + " samples";
  return c;
}

OracleReport run_oracle_suite(const OracleOptions& options) {
  OracleReport r;
  r.options = options;
  r.checks = run_gradient_checks(options);
  r.checks.push_back(run_estimator_consistency(options, true));
  r.checks.push_back(run_estimator_consistency(options, false));
  r.checks.push_back(run_variance_reduction(options));
  return r;
}

bool OracleReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass; });
}

std::string OracleReport::to_table() const {
  std::ostringstream os;
  os << "eps=" << options.eps << " tol=" << options.tol << " seeds=" << options.gradient_seeds
     << " init_scale=" << options.init_scale
     << " estimator_samples=" << options.estimator_samples << " variance_samples=" << options.variance_samples
     << '\n';
  os << std::left << std::setw(36) << "check" << std::setw(14) << "value" << std::setw(12) << "threshold"
     << "result\n";
  for (const auto& c : checks) {
    std::ostringstream v, t;
    v << std::setprecision(4) << c.value;
    t << std::setprecision(4) << c.threshold;
    os << std::left << std::setw(36) << c.name << std::setw(14) << v.str() << std::setw(12) << t.str()
       << (c.pass ? "PASS" : "FAIL") << "  " << c.detail << '\n';
  }
  return os.str();
}

std::string OracleReport::to_json() const {
  nlohmann::ordered_json j;
  j["eps"] = options.eps;
  j["tol"] = options.tol;
  j["seeds"] = options.gradient_seeds;
  j["init_scale"] = options.init_scale;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["all_pass"] = all_pass();
  return j.dump();
}

}  // namespace zpr
