#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "helpers.hpp"
#include "zpr/evaluation.hpp"

using namespace zpr;
using zpr::testing::corpus_from;
using zpr::testing::hand_corpus;
using zpr::testing::small_toy_corpus;
using zpr::testing::small_train_config;
using zpr::testing::tiny_model;
using zpr::testing::worst_group_error;

namespace {

// Expected reward from 2^n independent forced rollouts.
double forced_expectation(const Model& m, const Document& d, const ZpInstance& zp) {
  const std::size_t n = zp.candidates.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    RolloutOptions opt;
    opt.mode = RolloutMode::kForced;
    for (std::size_t t = 0; t < n; ++t) opt.forced.push_back(mask >> t & 1 ? Action::kCorefer : Action::kNonCorefer);
    RngStream rng(0);
    const Trajectory tr = run_episode(m, d, zp, opt, rng);
    double p = 1.0;
    for (std::size_t t = 0; t < n; ++t) p *= tr.action_prob(t);
    total += p * tr.reward;
  }
  return total;
}

const char* kTwoInstances = R"({"type":"vocab","tokens":["a","b","c"]}
{"type":"doc","id":"x","source":"nw","sentences":[{"tokens":[1,2,3],"nps":[[0,1,true,false],[1,2,true,false]]}]}
{"type":"doc","id":"y","source":"bc","sentences":[{"tokens":[3,2,1],"nps":[[0,1,true,false],[1,2,true,false]]}]}
{"type":"zp","doc":"x","sent":0,"gap":2,"candidates":[[0,0,1],[0,1,2]],"gold":[0]}
{"type":"zp","doc":"y","sent":0,"gap":2,"candidates":[[0,0,1],[0,1,2]],"gold":[1]}
)";

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("micro-averaged hand example") {
  const Corpus c = corpus_from(kTwoInstances);
  const MetricsReport r = score_predictions(c, {{0}, {}});
  CHECK(r.precision() == 1.0);
  CHECK(r.recall() == 0.5);
  CHECK(r.f() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.n_instances() == 2);
  REQUIRE(r.by_source.size() == 2);
  CHECK(r.by_source.at("nw").f == 1.0);
  CHECK(r.by_source.at("bc").f == 0.0);

  const MetricsReport perfect = score_predictions(c, {{0}, {1}});
  CHECK(perfect.f() == 1.0);
  CHECK_THROWS_AS(score_predictions(c, {{0}}), std::invalid_argument);
}

TEST_CASE("macro averaging") {
  const Corpus c = corpus_from(kTwoInstances);
  const MetricsReport r = score_predictions(c, {{0, 1}, {1}}, Averaging::kMacro);
  CHECK(r.precision() == doctest::Approx(0.75));
  CHECK(r.recall() == 1.0);
  CHECK(r.f() == doctest::Approx(harmonic_f(0.75, 1.0)));
}

TEST_CASE("empty corpus") {
  const MetricsReport r = evaluate(zpr::testing::zero_model(3), Corpus{});
  CHECK(r.n_instances() == 0);
  CHECK(r.f() == 0.0);
  CHECK(nlohmann::json::parse(r.to_json())["overall"]["n_instances"] == 0);
}

TEST_CASE("single instance evaluation equals the greedy rollout reward") {
  const Corpus c = hand_corpus();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Model m = tiny_model(c.vocabulary.size(), seed, 1.0);
    RngStream rng(0);
    const Trajectory t = run_episode(m, c.documents[0], c.instances[0], {}, rng);
    CHECK(evaluate(m, c).f() == doctest::Approx(t.reward).epsilon(1e-15));
  }
}

TEST_CASE("worker count does not change predictions") {
  const Corpus c = small_toy_corpus(30);
  const Model m = tiny_model(c.vocabulary.size(), 4, 0.3);
  const auto one = greedy_predictions(m, c, 1);
  CHECK(greedy_predictions(m, c, 3) == one);
  CHECK(greedy_predictions(m, c, 64) == one);
  CHECK_THROWS_AS(greedy_predictions(m, c, 0), std::invalid_argument);
  const std::string table = evaluate(m, c, Averaging::kMicro, 2).to_table(true);
  CHECK(table.find("toy") != std::string::npos);
}

TEST_CASE("one candidate: expected reward equals p(corefer)") {
  const Corpus c = corpus_from(R"({"type":"vocab","tokens":["a","b"]}
{"type":"doc","id":"x","sentences":[{"tokens":[1,2],"nps":[[0,1,true,false]]}]}
{"type":"zp","doc":"x","sent":0,"gap":1,"candidates":[[0,0,1]],"gold":[0]}
)");
  const Model m = tiny_model(c.vocabulary.size(), 9, 1.0);
  RngStream rng(0);
  const double q = run_episode(m, c.documents[0], c.instances[0], {}, rng).steps[0].dist.p_corefer;
  CHECK(exact_expected_reward(m, c.documents[0], c.instances[0]) == doctest::Approx(q).epsilon(1e-14));
}

TEST_CASE("deterministic perfect policy has expected reward 1") {
  Corpus c = hand_corpus();
  c.instances[0].gold_antecedents = {0, 1, 2};
  Model m = zpr::testing::zero_model(c.vocabulary.size());
  m.params()[m.agent().bs].value[0] = 800.0;
  m.params()[m.agent().bs].value[1] = -800.0;
  CHECK(exact_expected_reward(m, c.documents[0], c.instances[0]) == 1.0);
}

TEST_CASE("enumeration agrees with independent forced rollouts") {
  const Corpus c = hand_corpus();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Model m = tiny_model(c.vocabulary.size(), seed, 0.8);
    const auto seqs = enumerate_sequences(m, c.documents[0], c.instances[0]);
    CHECK(seqs.size() == 8);
    double total = 0.0;
    for (const auto& s : seqs) total += s.probability;
    CHECK(std::abs(total - 1.0) <= 1e-9);
    const double exact = exact_expected_reward(m, c.documents[0], c.instances[0]);
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
    CHECK(std::abs(exact - forced_expectation(m, c.documents[0], c.instances[0])) <= 1e-12);
  }
}

TEST_CASE("expected reward agrees with a Monte Carlo mean") {
  const Corpus c = hand_corpus();
  const Model m = tiny_model(c.vocabulary.size(), 3, 0.8);
  const double exact = exact_expected_reward(m, c.documents[0], c.instances[0]);
  RngStream rng(99);
  RolloutOptions opt;
  opt.mode = RolloutMode::kSample;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = run_episode(m, c.documents[0], c.instances[0], opt, rng).reward;
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 3 * se);
}

TEST_CASE("exact policy gradient matches finite differences of the expected reward") {
  const Corpus c = hand_corpus();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Model m = tiny_model(c.vocabulary.size(), seed);
    const auto analytic = exact_policy_gradient(m, c.documents[0], c.instances[0]);
    const auto numeric = finite_diff_grad(
        [&](const ParamStore&) { return exact_expected_reward(m, c.documents[0], c.instances[0]); }, m.params(),
        1e-5);
    CHECK(worst_group_error(analytic, numeric) <= 1e-4);
    // Without a baseline the estimator is the exact gradient itself.
    const auto raw = exact_estimator_mean(m, c.documents[0], c.instances[0], false);
    CHECK(worst_group_error(raw, analytic) <= 1e-12);
  }
}

TEST_CASE("constant reward gives a zero gradient") {
  const Corpus c = hand_corpus();
  // Reward fixed at 1 for every sequence: the weights are P(seq) alone,
  // whose gradients sum to zero.
  const Model m = tiny_model(c.vocabulary.size(), 6);
  Model work = m;
  work.params().zero_grads();
  for (const auto& seq : enumerate_sequences(m, c.documents[0], c.instances[0])) {
    RolloutOptions opt;
    opt.mode = RolloutMode::kForced;
    opt.forced = seq.actions;
    RngStream rng(0);
    const Trajectory tr = run_episode(work, c.documents[0], c.instances[0], opt, rng);
    backprop_trajectory(work, tr, std::vector<double>(tr.steps.size(), seq.probability));
  }
  double worst = 0.0;
  for (const auto& g : work.params().grads()) {
    for (double v : g.values()) worst = std::max(worst, std::abs(v));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("enumeration guards") {
  std::string nps, cands;
  std::vector<int> toks;
  for (int i = 0; i < 21; ++i) {
    nps += (i ? "," : "") + std::string("[") + std::to_string(i) + "," + std::to_string(i + 1) + ",true,false]";
    cands += (i ? "," : "") + std::string("[0,") + std::to_string(i) + "," + std::to_string(i + 1) + "]";
  }
  std::string tokens;
  for (int i = 0; i < 22; ++i) tokens += (i ? "," : "") + std::string("1");
  const std::string head = std::string(R"({"type":"vocab","tokens":["a"]})") + "\n" +
                           R"({"type":"doc","id":"x","sentences":[{"tokens":[)" + tokens + R"(],"nps":[)" + nps +
                           "]}]}\n";
  const Corpus big = corpus_from(head + R"({"type":"zp","doc":"x","sent":0,"gap":21,"candidates":[)" + cands +
                                 R"(],"gold":[0]})");
  const Model m = tiny_model(big.vocabulary.size(), 1);
  CHECK_THROWS_AS(exact_expected_reward(m, big.documents[0], big.instances[0]), EnumerationGuardError);

  Corpus eleven = big;
  eleven.instances[0].candidates.resize(11);
  CHECK_THROWS_AS(exact_policy_gradient(m, eleven.documents[0], eleven.instances[0]), EnumerationGuardError);
}

TEST_CASE("seed summaries") {
  const SeedStudy s = summarize_seeds({{1, 0.5}, {2, 0.7}, {3, 0.6}, {4, 0.9}});
  CHECK(s.min_f == 0.5);
  CHECK(s.max_f == 0.9);
  CHECK(s.median_f == doctest::Approx(0.65));
  CHECK(s.sigma == doctest::Approx(std::sqrt(0.021875)));
  const auto j = nlohmann::json::parse(s.to_json());
  CHECK(j["runs"].size() == 4);
  CHECK(s.to_table().find("sigma") != std::string::npos);
}

TEST_CASE("seed study: a repeated seed reproduces its F") {
  const Corpus c = small_toy_corpus(15);
  const TrainConfig cfg = small_train_config(2, 1);
  const SeedStudy s = seed_study(c, cfg, {3, 3, 4});
  REQUIRE(s.runs.size() == 3);
  CHECK(s.runs[0].second == s.runs[1].second);
  CHECK(s.min_f <= s.median_f);
  CHECK(s.median_f <= s.max_f);
  CHECK(s.sigma >= 0.0);
  CHECK_THROWS_AS(seed_study(c, cfg, {1}), std::invalid_argument);
}

TEST_CASE("sweep: one row per request, zero iterations is the initial policy") {
  const Corpus c = small_toy_corpus(15);
  const TrainConfig cfg = small_train_config(0, 1);
  const auto rows = sweep_pretrain_iterations(c, cfg, {0, 2, 1});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].iterations == 0);
  CHECK(rows[1].iterations == 2);
  CHECK(rows[2].iterations == 1);

  auto [train_set, dev_set] = split_train_dev(c, cfg.dev_fraction, cfg.split_seed);
  RngStream rng(cfg.seed);
  const Model init = Model::initialized(cfg.model_config(c.vocabulary.size()), rng);
  CHECK(rows[0].dev_f_pretrain == evaluate(init, dev_set).f());

  const auto again = sweep_pretrain_iterations(c, cfg, {0, 2, 1});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].dev_f_pretrain == rows[i].dev_f_pretrain);
    CHECK(again[i].dev_f_rl == rows[i].dev_f_rl);
  }
  CHECK(nlohmann::json::parse(sweep_json(rows)).size() == 3);
  CHECK_THROWS_AS(sweep_pretrain_iterations(c, cfg, {-1}), std::invalid_argument);
}

}  // TEST_SUITE
