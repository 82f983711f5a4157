#include "zpr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "zpr/evaluation.hpp"
#include "zpr/features.hpp"
#include "zpr/math.hpp"

namespace zpr {

InstanceEncoding encode_instance(const Model& model, const Document& doc, const ZpInstance& zp) {
  InstanceEncoding enc;
  enc.zp = encode_zp(model, doc, zp.location());
  enc.nps.reserve(zp.candidates.size());
  for (std::size_t i = 0; i < zp.candidates.size(); ++i) {
    enc.nps.push_back(encode_np(model, doc, zp.candidates[i]));
    enc.features.push_back(extract_features(doc, zp.location(), zp.candidates, i));
  }
  return enc;
}

std::vector<Action> gold_actions(const ZpInstance& zp) {
  std::vector<Action> actions(zp.candidates.size(), Action::kNonCorefer);
  for (int g : zp.gold_antecedents) actions[static_cast<std::size_t>(g)] = Action::kCorefer;
  return actions;
}

Trajectory run_episode(const Model& model, const Document& doc, const ZpInstance& zp, const RolloutOptions& options,
                       RngStream& rng) {
  const std::size_t n = zp.candidates.size();
  if (n == 0) throw std::invalid_argument("run_episode: instance has no candidates");
  if (options.mode == RolloutMode::kForced && options.forced.size() != n) {
    throw std::invalid_argument("run_episode: forced action count differs from candidate count");
  }
  const ModelConfig& cfg = model.config();
  Trajectory tr;
  tr.instance = &zp;
  tr.encoding = encode_instance(model, doc, zp);
  std::vector<std::size_t> memory;
  std::vector<Vector> memory_vecs;
  tr.steps.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    Step st;
    st.memory = memory;
    st.pooled = pool_antecedents(memory_vecs, cfg.d_hidden);
    const Vector state =
        assemble_state(cfg, tr.encoding.zp.vec, tr.encoding.nps[t].vec, st.pooled.vec, tr.encoding.features[t]);
    AgentOutput out = agent_forward(model, state, options.dropout_rate, rng, options.training);
    st.dist = out.dist;
    st.cache = std::move(out.cache);
    switch (options.mode) {
      case RolloutMode::kSample:
        st.action = rng.uniform() < st.dist.p_corefer ? Action::kCorefer : Action::kNonCorefer;
        break;
      case RolloutMode::kGreedy:
        st.action = st.dist.p_corefer >= st.dist.p_non_corefer ? Action::kCorefer : Action::kNonCorefer;
        break;
      case RolloutMode::kForced:
        st.action = options.forced[t];
        break;
    }
    if (st.action == Action::kCorefer) {
      memory.push_back(t);
      memory_vecs.push_back(tr.encoding.nps[t].vec);
    }
    tr.steps.push_back(std::move(st));
  }
  for (std::size_t i : memory) tr.selected.push_back(static_cast<int>(i));
  tr.reward = compute_reward(tr.selected, zp.gold_antecedents);
  return tr;
}

double compute_reward(std::span<const int> predicted, std::span<const int> gold) {
  if (gold.empty()) throw std::invalid_argument("compute_reward: gold set is empty");
  const std::set<int> pred(predicted.begin(), predicted.end());
  const std::set<int> truth(gold.begin(), gold.end());
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (int p : pred) hit += truth.count(p);
  const double precision = static_cast<double>(hit) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(hit) / static_cast<double>(truth.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> compute_baselines(const Trajectory& trajectory) {
  const auto& gold = trajectory.instance->gold_antecedents;
  std::vector<double> b(trajectory.steps.size());
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    std::vector<int> with, without;
    for (int s : trajectory.selected) {
      if (s != static_cast<int>(t)) without.push_back(s);
    }
    with = without;
    with.push_back(static_cast<int>(t));
    const auto& dist = trajectory.steps[t].dist;
    b[t] = dist.p_corefer * compute_reward(with, gold) + dist.p_non_corefer * compute_reward(without, gold);
  }
  return b;
}

void backprop_trajectory(Model& model, const Trajectory& trajectory, std::span<const double> coeffs) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = trajectory.steps.size();
  if (coeffs.size() != n) throw std::invalid_argument("backprop_trajectory: one coefficient per step required");
  const std::size_t dh = cfg.d_hidden;
  Vector d_zp(cfg.d_zp(), 0.0);
  std::vector<Vector> d_np(n, Vector(dh, 0.0));
  bool any = false;
  for (std::size_t t = 0; t < n; ++t) {
    if (coeffs[t] == 0.0) continue;
    any = true;
    const Step& st = trajectory.steps[t];
    const Vector d_state = agent_backward(model, st.cache, st.action, coeffs[t]);
    const std::span<const double> ds(d_state);
    axpy(1.0, ds.subspan(0, cfg.d_zp()), d_zp);
    axpy(1.0, ds.subspan(cfg.d_zp(), dh), d_np[t]);
    const auto d_mem = pool_antecedents_backward(st.pooled, ds.subspan(cfg.d_zp() + dh, cfg.d_ante()));
    for (std::size_t j = 0; j < d_mem.size(); ++j) axpy(1.0, d_mem[j], d_np[st.memory[j]]);
    // Feature coordinates are inputs, not parameters.
  }
  if (!any) return;
  encode_zp_backward(model, trajectory.encoding.zp, d_zp);
  for (std::size_t i = 0; i < n; ++i) encode_np_backward(model, trajectory.encoding.nps[i], d_np[i]);
}

void reinforce_update(Model& model, Trajectory& trajectory, bool use_baseline) {
  if (use_baseline && trajectory.baselines.size() != trajectory.steps.size()) {
    trajectory.baselines = compute_baselines(trajectory);
  }
  std::vector<double> coeffs(trajectory.steps.size());
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    const double b = use_baseline ? trajectory.baselines[t] : 0.0;
    coeffs[t] = -(trajectory.reward - b);
  }
  backprop_trajectory(model, trajectory, coeffs);
}

double pretrain_loss(Model& model, const Document& doc, const ZpInstance& zp, PretrainObjective objective,
                     double dropout_rate, RngStream& rng, bool training) {
  RolloutOptions opt;
  opt.mode = RolloutMode::kForced;
  opt.forced = gold_actions(zp);
  opt.dropout_rate = dropout_rate;
  opt.training = training;
  const Trajectory tr = run_episode(model, doc, zp, opt, rng);
  double loss = 0.0;
  std::vector<double> coeffs(tr.steps.size(), 0.0);
  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    if (objective == PretrainObjective::kGoldOnly && tr.steps[t].action != Action::kCorefer) continue;
    loss -= std::log(tr.action_prob(t));
    coeffs[t] = -1.0;
  }
  backprop_trajectory(model, tr, coeffs);
  return loss;
}

// ------------------------------------------------------------ config

std::string to_string(Phase phase) { return phase == Phase::kPretrain ? "pretrain" : "rl"; }

void HyperConfig::validate() const {
  const std::string name = to_string(phase);
  if (epochs < 0) throw std::invalid_argument(name + " epochs must be non-negative");
  if (batch <= 0) throw std::invalid_argument(name + " batch must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument(name + " dropout must be in [0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument(name + " learning rate must be a non-negative finite number");
  }
}

ModelConfig TrainConfig::model_config(std::size_t vocab_size) const {
  ModelConfig m;
  m.vocab_size = vocab_size;
  m.d_emb = d_emb;
  m.d_hidden = d_hidden;
  m.hidden1 = hidden1;
  m.hidden2 = hidden2;
  return m;
}

void TrainConfig::validate() const {
  pretrain.validate();
  rl.validate();
  if (!(dev_fraction >= 0.0 && dev_fraction <= 1.0)) throw std::invalid_argument("dev_fraction must be in [0, 1]");
  if (d_emb == 0 || d_hidden == 0 || hidden1 == 0 || hidden2 == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
}

std::string EpochRecord::to_json() const {
  nlohmann::ordered_json j{{"phase", to_string(phase)}, {"epoch", epoch}, {"loss_or_mean_reward", loss_or_mean_reward},
                           {"dev_p", dev_p},           {"dev_r", dev_r}, {"dev_f", dev_f},
                           {"seconds", seconds}};
  return j.dump();
}

bool EpochRecord::same_outcome(const EpochRecord& o) const {
  return phase == o.phase && epoch == o.epoch && loss_or_mean_reward == o.loss_or_mean_reward && dev_p == o.dev_p &&
         dev_r == o.dev_r && dev_f == o.dev_f;
}

// ------------------------------------------------------------ loops

void run_phase(Model& model, const Corpus& train_set, const Corpus& dev, const HyperConfig& hyper,
               const TrainConfig& config, RngStream& rng, const EpochCallback& on_epoch) {
  hyper.validate();
  const std::size_t n = train_set.instances.size();
  if (n == 0) throw std::invalid_argument("training set is empty");
  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    model.params().zero_grads();
    for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(hyper.batch)) {
      const std::size_t e = std::min(n, b + static_cast<std::size_t>(hyper.batch));
      for (std::size_t k = b; k < e; ++k) {
        const ZpInstance& zp = train_set.instances[order[k]];
        const Document& doc = train_set.document_of(zp);
        if (hyper.phase == Phase::kPretrain) {
          total += pretrain_loss(model, doc, zp, config.objective, hyper.dropout, rng, true);
        } else {
          RolloutOptions opt;
          opt.mode = RolloutMode::kSample;
          opt.dropout_rate = hyper.dropout;
          opt.training = true;
          Trajectory tr = run_episode(model, doc, zp, opt, rng);
          reinforce_update(model, tr, config.use_baseline);
          total += tr.reward;
        }
      }
      adagrad_step(model.params(), hyper.learning_rate);
    }
    const MetricsReport report = evaluate(model, dev);
    EpochRecord rec;
    rec.phase = hyper.phase;
    rec.epoch = epoch;
    rec.loss_or_mean_reward = total / static_cast<double>(n);
    rec.dev_p = report.precision();
    rec.dev_r = report.recall();
    rec.dev_f = report.f();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_epoch) on_epoch(rec, model);
  }
}

TrainResult train(const Corpus& train_set, const Corpus& dev_set, const TrainConfig& config) {
  config.validate();
  if (train_set.instances.empty()) throw std::invalid_argument("training set is empty");
  RngStream rng(config.seed);
  Model model = Model::initialized(config.model_config(train_set.vocabulary.size()), rng);

  TrainResult result;
  result.best_model = model;
  result.pretrained = model;
  double best_pretrain_f = -1.0;
  auto track = [&](const EpochRecord& rec, const Model& m) {
    result.log.push_back(rec);
    if (rec.dev_f > result.best_dev_f) {
      result.best_dev_f = rec.dev_f;
      result.best_model = m;
      result.best_phase = rec.phase;
      result.best_epoch = rec.epoch;
    }
  };
  run_phase(model, train_set, dev_set, config.pretrain, config, rng, [&](const EpochRecord& rec, const Model& m) {
    track(rec, m);
    if (config.rl_from_best_pretrain && rec.dev_f > best_pretrain_f) {
      best_pretrain_f = rec.dev_f;
      result.pretrained = m;
    }
  });
  if (!config.rl_from_best_pretrain) result.pretrained = model;
  if (config.run_rl) {
    model = result.pretrained;
    if (config.reset_optimizer_between_phases) {
      for (auto& p : model.params()) p.accum.zero();
    }
    run_phase(model, train_set, dev_set, config.rl, config, rng, track);
  }
  result.final_model = std::move(model);
  result.rng = rng;
  if (result.log.empty()) result.best_model = result.final_model;
  return result;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config) {
  if (corpus.instances.empty()) throw std::invalid_argument("corpus has no instances");
  auto [train_set, dev_set] = split_train_dev(corpus, config.dev_fraction, config.split_seed);
  return train(train_set, dev_set, config);
}

}  // namespace zpr
