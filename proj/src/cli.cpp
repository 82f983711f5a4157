#include "zpr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "zpr/checkpoint.hpp"
#include "zpr/corpus.hpp"
#include "zpr/evaluation.hpp"
#include "zpr/oracle_suite.hpp"
#include "zpr/run_config.hpp"
#include "zpr/tensor.hpp"
#include "zpr/training.hpp"

namespace zpr {

namespace {

// Flag name -> config key; every training setting is reachable both ways.
const std::vector<std::pair<std::string, std::string>> kTrainFlags = {
    {"--pretrain-epochs", "pretrain_epochs"},
    {"--rl-epochs", "rl_epochs"},
    {"--batch", "batch"},
    {"--pretrain-batch", "pretrain_batch"},
    {"--rl-batch", "rl_batch"},
    {"--pretrain-dropout", "pretrain_dropout"},
    {"--rl-dropout", "rl_dropout"},
    {"--pretrain-lr", "pretrain_lr"},
    {"--rl-lr", "rl_lr"},
    {"--dev-fraction", "dev_fraction"},
    {"--split-seed", "split_seed"},
    {"--d-emb", "d_emb"},
    {"--d-hidden", "d_hidden"},
    {"--hidden1", "hidden1"},
    {"--hidden2", "hidden2"},
    {"--objective", "objective"},
};

struct TrainFlags {
  std::string config_path;
  std::string seed;
  std::map<std::string, std::string> values;
  bool no_rl = false;
  bool no_baseline = false;
  bool keep_optimizer = false;
  bool rl_from_best = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value file overriding defaults");
  cmd->add_option("--seed", f.seed, "training seed");
  for (const auto& [flag, key] : kTrainFlags) cmd->add_option(flag, f.values[key]);
  cmd->add_flag("--no-rl", f.no_rl, "skip the RL phase");
  cmd->add_flag("--no-baseline", f.no_baseline, "REINFORCE without the per-step baseline");
  cmd->add_flag("--keep-optimizer", f.keep_optimizer, "carry Adagrad accumulators into the RL phase");
  cmd->add_flag("--rl-from-best-pretrain", f.rl_from_best, "start RL from the best-dev pretraining epoch");
}

// Defaults, then the config file, then explicit flags.
RunConfig build_config(const TrainFlags& f) {
  RunConfig rc;
  if (!f.config_path.empty()) apply_config_file(rc, f.config_path);
  for (const auto& [key, value] : f.values) {
    if (!value.empty()) apply_setting(rc, key, value);
  }
  if (!f.seed.empty()) apply_setting(rc, "seed", f.seed);
  if (f.no_rl) rc.train.run_rl = false;
  if (f.no_baseline) rc.train.use_baseline = false;
  if (f.keep_optimizer) rc.train.reset_optimizer_between_phases = false;
  if (f.rl_from_best) rc.train.rl_from_best_pretrain = true;
  rc.validate();
  rc.train.validate();
  return rc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<long long> parse_list(const std::string& name, const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(name, "expected a comma-separated integer list, got '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(name, "list is empty");
  return out;
}

std::string summary_line(const CorpusSummary& s) {
  std::ostringstream os;
  os << "documents=" << s.documents << " sentences=" << s.sentences << " instances=" << s.instances
     << " candidates=" << s.candidates << " gold_links=" << s.gold_links;
  return os.str();
}

int cmd_gen_toy(const ToyCorpusOptions& opt, const std::string& out_path, std::ostream& out) {
  const Corpus corpus = generate_toy_corpus(opt);
  save_corpus(corpus, out_path);
  out << summary_line(summarize(corpus)) << '\n';
  return kExitOk;
}

int cmd_train(const TrainFlags& flags, const std::string& corpus_path, const std::string& out_dir, std::ostream& out) {
  RunConfig rc = build_config(flags);
  const Corpus corpus = load_corpus(corpus_path);
  if (corpus.instances.empty()) throw ValidationError("corpus has no instances");
  std::filesystem::create_directories(out_dir);
  out << describe(rc.train);

  auto [train_set, dev_set] = split_train_dev(corpus, rc.train.dev_fraction, rc.train.split_seed);
  out << "train instances=" << train_set.instances.size() << " dev instances=" << dev_set.instances.size() << '\n';
  const TrainResult result = train(train_set, dev_set, rc.train);

  std::ostringstream log;
  for (const auto& rec : result.log) log << rec.to_json() << '\n';
  const std::filesystem::path dir(out_dir);
  write_text((dir / "log.jsonl").string(), log.str());

  Checkpoint final_ckpt{result.final_model, corpus.vocabulary, Phase::kPretrain, 0, result.rng};
  if (!result.log.empty()) {
    final_ckpt.phase = result.log.back().phase;
    final_ckpt.epoch = result.log.back().epoch;
  }
  save_checkpoint(final_ckpt, (dir / "final.ckpt").string());
  Checkpoint best_ckpt{result.best_model, corpus.vocabulary, result.best_phase, result.best_epoch, result.rng};
  save_checkpoint(best_ckpt, (dir / "best.ckpt").string());

  const double final_f = evaluate(result.final_model, dev_set).f();
  out << std::fixed << std::setprecision(4);
  out << "epochs logged=" << result.log.size() << '\n';
  out << "best dev F=" << std::max(result.best_dev_f, 0.0) << " (" << to_string(result.best_phase) << " epoch "
      << result.best_epoch << ")\n";
  out << "final dev F=" << final_f << '\n';
  out << "wrote " << (dir / "log.jsonl").string() << ", " << (dir / "best.ckpt").string() << ", "
      << (dir / "final.ckpt").string() << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_path, bool per_source, bool macro, bool as_json,
             int workers, std::ostream& out) {
  if (workers < 1) throw ConfigError("workers", "must be a positive integer");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus corpus = with_vocabulary(load_corpus(corpus_path), ckpt.vocabulary);
  const MetricsReport report =
      evaluate(ckpt.model, corpus, macro ? Averaging::kMacro : Averaging::kMicro, workers);
  out << (as_json ? report.to_json() + "\n" : report.to_table(per_source));
  return kExitOk;
}

int cmd_oracle(const OracleOptions& opt, bool as_json, std::ostream& out) {
  if (!(opt.eps > 0.0) || !(opt.tol > 0.0)) throw ConfigError("eps/tol", "must be positive");
  if (opt.gradient_seeds < 1) throw ConfigError("seeds", "must be a positive integer");
  if (opt.estimator_samples < 2 || opt.variance_samples < 2) throw ConfigError("samples", "need at least 2");
  const OracleReport report = run_oracle_suite(opt);
  out << (as_json ? report.to_json() + "\n" : report.to_table());
  return report.all_pass() ? kExitOk : kExitNumericCheck;
}

int cmd_sweep(const TrainFlags& flags, const std::string& corpus_path, const std::string& iterations,
              const std::string& out_path, bool as_json, std::ostream& out) {
  const RunConfig rc = build_config(flags);
  std::vector<int> counts;
  for (long long k : parse_list("iterations", iterations)) {
    if (k < 0 || k > 1'000'000) throw ConfigError("iterations", "counts must be non-negative");
    counts.push_back(static_cast<int>(k));
  }
  const Corpus corpus = load_corpus(corpus_path);
  const auto rows = sweep_pretrain_iterations(corpus, rc.train, counts);
  const std::string text = as_json ? sweep_json(rows) + "\n" : sweep_table(rows);
  if (!out_path.empty()) write_text(out_path, text);
  out << text;
  return kExitOk;
}

int cmd_seed_study(const TrainFlags& flags, const std::string& corpus_path, const std::string& seeds_text,
                   const std::string& out_path, bool as_json, std::ostream& out) {
  const RunConfig rc = build_config(flags);
  std::vector<std::uint64_t> seeds;
  for (long long s : parse_list("seeds", seeds_text)) {
    if (s < 0) throw ConfigError("seeds", "must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  const Corpus corpus = load_corpus(corpus_path);
  const SeedStudy study = seed_study(corpus, rc.train, seeds);
  const std::string text = as_json ? study.to_json() + "\n" : study.to_table();
  if (!out_path.empty()) write_text(out_path, text);
  out << text;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-pronoun antecedent selection with a policy-gradient agent", "zpr"};
  app.require_subcommand(1);

  ToyCorpusOptions toy;
  std::string toy_out;
  auto* gen = app.add_subcommand("gen-toy", "write a synthetic corpus");
  gen->add_option("--out", toy_out, "output corpus path")->required();
  gen->add_option("--docs", toy.n_docs, "number of documents")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", toy.seed, "generator seed");
  gen->add_option("--set-dependent", toy.set_dependent_fraction, "fraction of set-dependent instances")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--zps-per-doc", toy.zps_per_doc)->check(CLI::PositiveNumber);
  gen->add_option("--min-candidates", toy.min_candidates)->check(CLI::PositiveNumber);
  gen->add_option("--max-candidates", toy.max_candidates)->check(CLI::PositiveNumber);
  gen->add_option("--vocab-size", toy.vocab_size)->check(CLI::PositiveNumber);
  gen->add_option("--source-tag", toy.source_tag);

  TrainFlags train_flags;
  std::string train_corpus, train_out;
  auto* tr = app.add_subcommand("train", "pretrain, then the RL phase");
  tr->add_option("--corpus", train_corpus, "corpus file")->required();
  tr->add_option("--out", train_out, "output directory")->required();
  add_train_flags(tr, train_flags);

  std::string eval_ckpt, eval_corpus;
  bool per_source = false, macro = false, eval_json = false;
  int workers = 1;
  auto* ev = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  ev->add_option("--corpus", eval_corpus, "corpus file")->required();
  ev->add_flag("--per-source", per_source, "one row per source tag");
  ev->add_flag("--macro", macro, "macro-average over instances");
  ev->add_flag("--json", eval_json, "print JSON instead of a table");
  ev->add_option("--workers", workers, "evaluation threads");

  OracleOptions oracle;
  bool oracle_json = false;
  auto* orc = app.add_subcommand("oracle", "gradient-check and estimator-consistency suites");
  orc->add_option("--eps", oracle.eps, "finite-difference step");
  orc->add_option("--tol", oracle.tol, "relative error tolerance");
  orc->add_option("--seed", oracle.seed, "first fixture seed");
  orc->add_option("--seeds", oracle.gradient_seeds, "fixtures per gradient check");
  orc->add_option("--samples", oracle.estimator_samples, "estimator-consistency samples");
  orc->add_option("--variance-samples", oracle.variance_samples, "variance-reduction samples");
  orc->add_option("--init-scale", oracle.init_scale, "fixture weight range");
  orc->add_flag("--inject-wrong-sign", oracle.inject_wrong_sign, "negate analytic gradients (self-test)");
  orc->add_flag("--json", oracle_json, "print JSON instead of a table");

  TrainFlags sweep_flags;
  std::string sweep_corpus, sweep_iterations = "0,10,20,30,40,50,60,70", sweep_out;
  bool sweep_as_json = false;
  auto* sw = app.add_subcommand("sweep", "dev F with and without RL per pretraining epoch count");
  sw->add_option("--corpus", sweep_corpus, "corpus file")->required();
  sw->add_option("--iterations", sweep_iterations, "comma-separated pretraining epoch counts");
  sw->add_option("--out", sweep_out, "also write the table to this file");
  sw->add_flag("--json", sweep_as_json);
  add_train_flags(sw, sweep_flags);

  TrainFlags study_flags;
  std::string study_corpus, study_seeds = "1,2,3,4,5", study_out;
  bool study_json = false;
  auto* ss = app.add_subcommand("seed-study", "train once per seed and report the F spread");
  ss->add_option("--corpus", study_corpus, "corpus file")->required();
  ss->add_option("--seeds", study_seeds, "comma-separated training seeds");
  ss->add_option("--out", study_out, "also write the table to this file");
  ss->add_flag("--json", study_json);
  add_train_flags(ss, study_flags);
  ss->remove_option(ss->get_option("--seed"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_toy(toy, toy_out, out);
    if (*tr) return cmd_train(train_flags, train_corpus, train_out, out);
    if (*ev) return cmd_eval(eval_ckpt, eval_corpus, per_source, macro, eval_json, workers, out);
    if (*orc) return cmd_oracle(oracle, oracle_json, out);
    if (*sw) return cmd_sweep(sweep_flags, sweep_corpus, sweep_iterations, sweep_out, sweep_as_json, out);
    if (*ss) return cmd_seed_study(study_flags, study_corpus, study_seeds, study_out, study_json, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumericCheck;
  } catch (const ConfigError& e) {
    err << "invalid setting " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "corpus parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ChecksumError& e) {
    err << "checksum error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FeatureVersionError& e) {
    err << "feature version mismatch: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"zpr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace zpr
