#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zpr/corpus.hpp"
#include "zpr/model.hpp"
#include "zpr/training.hpp"

namespace zpr {

enum class Averaging { kMicro, kMacro };

struct Counts {
  std::size_t n_instances = 0;
  std::size_t correct = 0;    // sum |pred ∩ gold|
  std::size_t predicted = 0;  // sum |pred|
  std::size_t gold = 0;       // sum |gold|
  // Per-instance sums for macro averaging.
  double sum_precision = 0.0;
  double sum_recall = 0.0;

  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;

  void add(std::span<const int> predicted_set, std::span<const int> gold_set);
  void finalize(Averaging averaging);
};

struct MetricsReport {
  Averaging averaging = Averaging::kMicro;
  Counts overall;
  std::map<std::string, Counts> by_source;

  double precision() const { return overall.precision; }
  double recall() const { return overall.recall; }
  double f() const { return overall.f; }
  std::size_t n_instances() const { return overall.n_instances; }

  std::string to_json() const;
  std::string to_table(bool per_source) const;
};

double harmonic_f(double precision, double recall);

// Scores externally supplied predictions (one candidate-index set per
// instance, same order as corpus.instances).
MetricsReport score_predictions(const Corpus& corpus, const std::vector<std::vector<int>>& predictions,
                                Averaging averaging = Averaging::kMicro);

// Greedy rollouts are independent given frozen parameters; `workers` > 1
// splits the instances across threads with identical results.
std::vector<std::vector<int>> greedy_predictions(const Model& model, const Corpus& corpus, int workers = 1);

// Greedy rollout per instance, dropout off.
MetricsReport evaluate(const Model& model, const Corpus& corpus, Averaging averaging = Averaging::kMicro,
                       int workers = 1);

// ------------------------------------------------- enumeration oracles

inline constexpr std::size_t kMaxEnumerationCandidates = 20;
inline constexpr std::size_t kMaxGradientEnumerationCandidates = 10;

class EnumerationGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SequenceOutcome {
  std::vector<Action> actions;
  double probability = 0.0;
  double reward = 0.0;
};

// All 2^n action sequences with their probability under the policy (memory
// evolving along each sequence, dropout off) and terminal reward.
std::vector<SequenceOutcome> enumerate_sequences(const Model& model, const Document& doc, const ZpInstance& zp);

// Expected terminal reward, summed exactly over every action sequence.
double exact_expected_reward(const Model& model, const Document& doc, const ZpInstance& zp);

// Gradient of exact_expected_reward: sum over sequences of
// P(seq) R(seq) sum_t grad log p(a_t). Layout matches ParamStore order.
std::vector<Tensor> exact_policy_gradient(const Model& model, const Document& doc, const ZpInstance& zp);

// Exact expectation of the single-episode estimator
// sum_t grad log p(a_t) (R - b_t) (b_t = 0 when use_baseline is false).
std::vector<Tensor> exact_estimator_mean(const Model& model, const Document& doc, const ZpInstance& zp,
                                         bool use_baseline);

// ------------------------------------------------------------ ablations

struct SweepRow {
  int iterations = 0;
  double dev_f_pretrain = 0.0;
  double dev_f_rl = 0.0;
};

// For each pretraining epoch count, dev F of the pretrained model and of
// the same model after the RL phase. Pretraining runs once up to the
// largest count; each row's RL phase starts from that row's snapshot.
std::vector<SweepRow> sweep_pretrain_iterations(const Corpus& corpus, const TrainConfig& config,
                                                std::vector<int> checkpoints);
std::string sweep_table(const std::vector<SweepRow>& rows);
std::string sweep_json(const std::vector<SweepRow>& rows);

struct SeedStudy {
  std::vector<std::pair<std::uint64_t, double>> runs;
  double min_f = 0.0;
  double median_f = 0.0;
  double max_f = 0.0;
  double sigma = 0.0;  // population standard deviation

  std::string to_json() const;
  std::string to_table() const;
};

SeedStudy summarize_seeds(std::vector<std::pair<std::uint64_t, double>> runs);

// Full train + evaluation per seed on one fixed train/dev split; F is the
// final model's dev F.
SeedStudy seed_study(const Corpus& corpus, const TrainConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace zpr
