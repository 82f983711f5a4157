#include "zpr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zpr/math.hpp"

namespace zpr {

using json = nlohmann::ordered_json;

double harmonic_f(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

void Counts::add(std::span<const int> predicted_set, std::span<const int> gold_set) {
  const std::set<int> pred(predicted_set.begin(), predicted_set.end());
  const std::set<int> truth(gold_set.begin(), gold_set.end());
  std::size_t hit = 0;
  for (int p : pred) hit += truth.count(p);
  ++n_instances;
  correct += hit;
  predicted += pred.size();
  gold += truth.size();
  sum_precision += pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
  sum_recall += truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
}

void Counts::finalize(Averaging averaging) {
  if (averaging == Averaging::kMicro) {
    precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
    recall = gold ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  } else {
    precision = n_instances ? sum_precision / static_cast<double>(n_instances) : 0.0;
    recall = n_instances ? sum_recall / static_cast<double>(n_instances) : 0.0;
  }
  f = harmonic_f(precision, recall);
}

namespace {

json counts_json(const Counts& c) {
  return json{{"n_instances", c.n_instances}, {"correct", c.correct}, {"predicted", c.predicted},
              {"gold", c.gold},               {"precision", c.precision}, {"recall", c.recall},
              {"f", c.f}};
}

}  // namespace

std::string MetricsReport::to_json() const {
  json j{{"averaging", averaging == Averaging::kMicro ? "micro" : "macro"}, {"overall", counts_json(overall)}};
  json per = json::object();
  for (const auto& [tag, c] : by_source) per[tag] = counts_json(c);
  j["by_source"] = per;
  return j.dump();
}

std::string MetricsReport::to_table(bool per_source) const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(16) << "source" << std::right << std::setw(8) << "n" << std::setw(10) << "P"
     << std::setw(10) << "R" << std::setw(10) << "F" << '\n';
  auto row = [&](const std::string& name, const Counts& c) {
    os << std::left << std::setw(16) << name << std::right << std::setw(8) << c.n_instances << std::setw(10)
       << c.precision << std::setw(10) << c.recall << std::setw(10) << c.f << '\n';
  };
  if (per_source) {
    for (const auto& [tag, c] : by_source) row(tag.empty() ? "(untagged)" : tag, c);
  }
  row("overall", overall);
  return os.str();
}

MetricsReport score_predictions(const Corpus& corpus, const std::vector<std::vector<int>>& predictions,
                                Averaging averaging) {
  if (predictions.size() != corpus.instances.size()) {
    throw std::invalid_argument("score_predictions: one prediction per instance required");
  }
  MetricsReport r;
  r.averaging = averaging;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const ZpInstance& zp = corpus.instances[i];
    r.overall.add(predictions[i], zp.gold_antecedents);
    r.by_source[corpus.document_of(zp).source_tag].add(predictions[i], zp.gold_antecedents);
  }
  r.overall.finalize(averaging);
  for (auto& [tag, c] : r.by_source) c.finalize(averaging);
  return r;
}

std::vector<std::vector<int>> greedy_predictions(const Model& model, const Corpus& corpus, int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  const std::size_t n = corpus.instances.size();
  std::vector<std::vector<int>> out(n);
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    RngStream unused(0);
    RolloutOptions opt;
    opt.mode = RolloutMode::kGreedy;
    for (std::size_t i = lo; i < hi; ++i) {
      const ZpInstance& zp = corpus.instances[i];
      out[i] = run_episode(model, corpus.document_of(zp), zp, opt, unused).selected;
    }
  };
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    run_range(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t lo = 0; lo < n; lo += chunk) pool.emplace_back(run_range, lo, std::min(n, lo + chunk));
  for (auto& t : pool) t.join();
  return out;
}

MetricsReport evaluate(const Model& model, const Corpus& corpus, Averaging averaging, int workers) {
  return score_predictions(corpus, greedy_predictions(model, corpus, workers), averaging);
}

// ------------------------------------------------------------ oracles

std::vector<SequenceOutcome> enumerate_sequences(const Model& model, const Document& doc, const ZpInstance& zp) {
  const std::size_t n = zp.candidates.size();
  if (n > kMaxEnumerationCandidates) {
    throw EnumerationGuardError("enumeration limited to " + std::to_string(kMaxEnumerationCandidates) +
                                " candidates, instance has " + std::to_string(n));
  }
  const ModelConfig& cfg = model.config();
  const InstanceEncoding enc = encode_instance(model, doc, zp);
  std::vector<SequenceOutcome> out;
  out.reserve(std::size_t{1} << n);
  RngStream unused(0);
  std::vector<Action> actions;
  std::vector<Vector> memory;
  std::vector<int> selected;

  std::function<void(std::size_t, double)> walk = [&](std::size_t t, double prob) {
    if (t == n) {
      out.push_back({actions, prob, compute_reward(selected, zp.gold_antecedents)});
      return;
    }
    const PoolResult pooled = pool_antecedents(memory, cfg.d_hidden);
    const Vector state = assemble_state(cfg, enc.zp.vec, enc.nps[t].vec, pooled.vec, enc.features[t]);
    const ActionDistribution dist = agent_forward(model, state, 0.0, unused, false).dist;

    actions.push_back(Action::kCorefer);
    memory.push_back(enc.nps[t].vec);
    selected.push_back(static_cast<int>(t));
    walk(t + 1, prob * dist.p_corefer);
    selected.pop_back();
    memory.pop_back();
    actions.back() = Action::kNonCorefer;
    walk(t + 1, prob * dist.p_non_corefer);
    actions.pop_back();
  };
  walk(0, 1.0);
  return out;
}

double exact_expected_reward(const Model& model, const Document& doc, const ZpInstance& zp) {
  double total = 0.0;
  for (const auto& s : enumerate_sequences(model, doc, zp)) total += s.probability * s.reward;
  return total;
}

namespace {

std::vector<Tensor> weighted_score_sum(const Model& model, const Document& doc, const ZpInstance& zp,
                                       const std::function<std::vector<double>(const SequenceOutcome&,
                                                                               const Trajectory&)>& coeffs_for) {
  if (zp.candidates.size() > kMaxGradientEnumerationCandidates) {
    throw EnumerationGuardError("gradient enumeration limited to " +
                                std::to_string(kMaxGradientEnumerationCandidates) + " candidates");
  }
  Model work = model;
  work.params().zero_grads();
  RngStream unused(0);
  for (const auto& seq : enumerate_sequences(model, doc, zp)) {
    RolloutOptions opt;
    opt.mode = RolloutMode::kForced;
    opt.forced = seq.actions;
    const Trajectory tr = run_episode(work, doc, zp, opt, unused);
    backprop_trajectory(work, tr, coeffs_for(seq, tr));
  }
  return work.params().grads();
}

}  // namespace

std::vector<Tensor> exact_policy_gradient(const Model& model, const Document& doc, const ZpInstance& zp) {
  return weighted_score_sum(model, doc, zp, [](const SequenceOutcome& seq, const Trajectory& tr) {
    return std::vector<double>(tr.steps.size(), seq.probability * seq.reward);
  });
}

std::vector<Tensor> exact_estimator_mean(const Model& model, const Document& doc, const ZpInstance& zp,
                                         bool use_baseline) {
  return weighted_score_sum(model, doc, zp, [use_baseline](const SequenceOutcome& seq, const Trajectory& tr) {
    std::vector<double> c(tr.steps.size(), seq.probability * seq.reward);
    if (use_baseline) {
      const auto b = compute_baselines(tr);
      for (std::size_t t = 0; t < c.size(); ++t) c[t] = seq.probability * (seq.reward - b[t]);
    }
    return c;
  });
}

// ---------------------------------------------------------- ablations

std::vector<SweepRow> sweep_pretrain_iterations(const Corpus& corpus, const TrainConfig& config,
                                                std::vector<int> checkpoints) {
  config.validate();
  for (int k : checkpoints) {
    if (k < 0) throw std::invalid_argument("sweep: iteration counts must be non-negative");
  }
  auto [train_set, dev_set] = split_train_dev(corpus, config.dev_fraction, config.split_seed);
  if (train_set.instances.empty()) throw std::invalid_argument("sweep: training split is empty");
  RngStream rng(config.seed);
  Model model = Model::initialized(config.model_config(train_set.vocabulary.size()), rng);

  std::vector<int> sorted = checkpoints;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<int, SweepRow> rows;
  int done = 0;
  for (int k : sorted) {
    HyperConfig pre = config.pretrain;
    pre.epochs = k - done;
    run_phase(model, train_set, dev_set, pre, config, rng, nullptr);
    done = k;
    SweepRow row;
    row.iterations = k;
    row.dev_f_pretrain = evaluate(model, dev_set).f();
    Model tuned = model;
    if (config.run_rl) {
      if (config.reset_optimizer_between_phases) {
        for (auto& p : tuned.params()) p.accum.zero();
      }
      RngStream rl_rng = rng;
      run_phase(tuned, train_set, dev_set, config.rl, config, rl_rng, nullptr);
    }
    row.dev_f_rl = evaluate(tuned, dev_set).f();
    rows[k] = row;
  }
  std::vector<SweepRow> out;
  for (int k : checkpoints) out.push_back(rows.at(k));
  return out;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::setw(12) << "iterations" << std::setw(14) << "F(pretrain)" << std::setw(14) << "F(+RL)" << '\n';
  for (const auto& r : rows) {
    os << std::setw(12) << r.iterations << std::setw(14) << r.dev_f_pretrain << std::setw(14) << r.dev_f_rl << '\n';
  }
  return os.str();
}

std::string sweep_json(const std::vector<SweepRow>& rows) {
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"iterations", r.iterations}, {"dev_f_pretrain", r.dev_f_pretrain}, {"dev_f_rl", r.dev_f_rl}});
  }
  return j.dump();
}

SeedStudy summarize_seeds(std::vector<std::pair<std::uint64_t, double>> runs) {
  SeedStudy s;
  s.runs = std::move(runs);
  if (s.runs.empty()) return s;
  std::vector<double> f;
  for (const auto& r : s.runs) f.push_back(r.second);
  std::sort(f.begin(), f.end());
  s.min_f = f.front();
  s.max_f = f.back();
  const std::size_t m = f.size() / 2;
  s.median_f = f.size() % 2 ? f[m] : 0.5 * (f[m - 1] + f[m]);
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f) var += (v - mean) * (v - mean);
  s.sigma = std::sqrt(var / static_cast<double>(f.size()));
  return s;
}

SeedStudy seed_study(const Corpus& corpus, const TrainConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw std::invalid_argument("seed_study: at least two seeds required");
  auto [train_set, dev_set] = split_train_dev(corpus, config.dev_fraction, config.split_seed);
  std::vector<std::pair<std::uint64_t, double>> runs;
  for (std::uint64_t seed : seeds) {
    TrainConfig c = config;
    c.seed = seed;
    const TrainResult r = train(train_set, dev_set, c);
    runs.emplace_back(seed, evaluate(r.final_model, dev_set).f());
  }
  return summarize_seeds(std::move(runs));
}

std::string SeedStudy::to_json() const {
  json rs = json::array();
  for (const auto& [seed, f] : runs) rs.push_back({{"seed", seed}, {"f", f}});
  return json{{"runs", rs}, {"min_f", min_f}, {"median_f", median_f}, {"max_f", max_f}, {"sigma", sigma}}.dump();
}

std::string SeedStudy::to_table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::setw(12) << "seed" << std::setw(10) << "F" << '\n';
  for (const auto& [seed, f] : runs) os << std::setw(12) << seed << std::setw(10) << f << '\n';
  os << std::setw(10) << "min F" << std::setw(10) << "median F" << std::setw(10) << "max F" << std::setw(12)
     << "sigma" << '\n';
  os << std::setw(10) << min_f << std::setw(10) << median_f << std::setw(10) << max_f << std::setprecision(6)
     << std::setw(12) << sigma << '\n';
  return os.str();
}

}  // namespace zpr
