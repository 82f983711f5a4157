#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zpr/agent.hpp"
#include "zpr/corpus.hpp"
#include "zpr/encoders.hpp"
#include "zpr/model.hpp"

namespace zpr {

// Encoder outputs shared by every step of one episode.
struct InstanceEncoding {
  ZpEncoding zp;
  std::vector<NpEncoding> nps;
  std::vector<Vector> features;
};

InstanceEncoding encode_instance(const Model& model, const Document& doc, const ZpInstance& zp);

struct Step {
  ActionDistribution dist;
  Action action = Action::kNonCorefer;
  std::vector<std::size_t> memory;  // candidates selected before this step
  PoolResult pooled;
  AgentCache cache;
};

struct Trajectory {
  const ZpInstance* instance = nullptr;
  InstanceEncoding encoding;
  std::vector<Step> steps;
  std::vector<int> selected;  // candidate indices chosen corefer
  double reward = 0.0;
  std::vector<double> baselines;

  double action_prob(std::size_t t) const { return steps[t].dist.prob(steps[t].action); }
};

enum class RolloutMode { kSample, kGreedy, kForced };

struct RolloutOptions {
  RolloutMode mode = RolloutMode::kGreedy;
  std::vector<Action> forced;  // kForced only, one action per candidate
  double dropout_rate = 0.0;
  bool training = false;
};

// Walks the candidates in stored order, pooling the memory of selected
// candidates into each state. Greedy ties (p = 0.5) resolve to corefer.
// The terminal reward is filled in; baselines are not.
Trajectory run_episode(const Model& model, const Document& doc, const ZpInstance& zp, const RolloutOptions& options,
                       RngStream& rng);

std::vector<Action> gold_actions(const ZpInstance& zp);

// Set F-score of the predicted candidate set against the gold set.
// Empty prediction scores 0. Throws std::invalid_argument on empty gold.
double compute_reward(std::span<const int> predicted, std::span<const int> gold);

// b_t = p_t(corefer) R(selected + t) + p_t(non) R(selected - t), every
// other realized action held fixed.
std::vector<double> compute_baselines(const Trajectory& trajectory);

// Backpropagates sum_t coeff[t] * log p(a_t) through agent, pooling,
// encoders and embeddings into the model's gradient buffers.
void backprop_trajectory(Model& model, const Trajectory& trajectory, std::span<const double> coeffs);

// Accumulates the gradient of -sum_t log p(a_t) (R - b_t); with
// use_baseline = false b_t is taken as 0. Computes baselines when needed.
void reinforce_update(Model& model, Trajectory& trajectory, bool use_baseline = true);

enum class PretrainObjective {
  kGoldActions,  // -sum_t log p(gold action at t)
  kGoldOnly,     // -sum over gold candidates of log p(corefer)
};

// Teacher-forced supervised loss; gold actions populate the memory.
// Gradients are accumulated into the model.
double pretrain_loss(Model& model, const Document& doc, const ZpInstance& zp, PretrainObjective objective,
                     double dropout_rate, RngStream& rng, bool training = true);

enum class Phase { kPretrain, kRl };
std::string to_string(Phase phase);

struct HyperConfig {
  Phase phase = Phase::kPretrain;
  int epochs = 70;
  int batch = 256;
  double dropout = 0.5;
  double learning_rate = 0.003;

  static HyperConfig pretrain_defaults() { return {Phase::kPretrain, 70, 256, 0.5, 0.003}; }
  static HyperConfig rl_defaults() { return {Phase::kRl, 50, 256, 0.7, 0.00009}; }
  void validate() const;
};

struct TrainConfig {
  HyperConfig pretrain = HyperConfig::pretrain_defaults();
  HyperConfig rl = HyperConfig::rl_defaults();
  bool run_rl = true;
  bool use_baseline = true;
  PretrainObjective objective = PretrainObjective::kGoldActions;
  bool reset_optimizer_between_phases = true;
  // RL starts from the last pretraining epoch unless this is set, in which
  // case it starts from the pretraining epoch with the best dev F.
  bool rl_from_best_pretrain = false;
  double dev_fraction = kDefaultDevFraction;
  std::uint64_t seed = 1;        // model init and training randomness
  std::uint64_t split_seed = 0;  // train/dev partition
  std::size_t d_emb = 100;
  std::size_t d_hidden = 100;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 512;

  ModelConfig model_config(std::size_t vocab_size) const;
  void validate() const;
};

struct EpochRecord {
  Phase phase = Phase::kPretrain;
  int epoch = 0;
  double loss_or_mean_reward = 0.0;
  double dev_p = 0.0;
  double dev_r = 0.0;
  double dev_f = 0.0;
  double seconds = 0.0;

  std::string to_json() const;
  // Equality ignoring wall-clock time.
  bool same_outcome(const EpochRecord& o) const;
};

struct TrainResult {
  Model final_model;
  Model best_model;  // highest dev F over all logged epochs
  double best_dev_f = -1.0;
  Phase best_phase = Phase::kPretrain;
  int best_epoch = 0;
  Model pretrained;  // state handed to the RL phase
  std::vector<EpochRecord> log;
  RngStream rng;  // training stream after the last epoch
};

// Runs one phase in place on `model`. Calls `on_epoch` after each epoch.
using EpochCallback = std::function<void(const EpochRecord&, const Model&)>;
void run_phase(Model& model, const Corpus& train, const Corpus& dev, const HyperConfig& hyper,
               const TrainConfig& config, RngStream& rng, const EpochCallback& on_epoch);

// Pretraining followed by the RL phase on an existing train/dev split.
TrainResult train(const Corpus& train_set, const Corpus& dev_set, const TrainConfig& config);

// Splits `corpus` by config.dev_fraction / config.split_seed, then trains.
TrainResult train(const Corpus& corpus, const TrainConfig& config);

}  // namespace zpr
