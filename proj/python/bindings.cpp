#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "zpr/checkpoint.hpp"
#include "zpr/cli.hpp"
#include "zpr/corpus.hpp"
#include "zpr/evaluation.hpp"
#include "zpr/oracle_suite.hpp"
#include "zpr/run_config.hpp"
#include "zpr/training.hpp"

namespace py = pybind11;
using namespace zpr;

namespace {

py::dict counts_dict(const Counts& c) {
  py::dict d;
  d["n_instances"] = c.n_instances;
  d["correct"] = c.correct;
  d["predicted"] = c.predicted;
  d["gold"] = c.gold;
  d["precision"] = c.precision;
  d["recall"] = c.recall;
  d["f"] = c.f;
  return d;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d = counts_dict(r.overall);
  py::dict per;
  for (const auto& [tag, c] : r.by_source) per[py::str(tag)] = counts_dict(c);
  d["by_source"] = per;
  d["averaging"] = r.averaging == Averaging::kMicro ? "micro" : "macro";
  return d;
}

py::dict record_dict(const EpochRecord& rec) {
  py::dict d;
  d["phase"] = to_string(rec.phase);
  d["epoch"] = rec.epoch;
  d["loss_or_mean_reward"] = rec.loss_or_mean_reward;
  d["dev_p"] = rec.dev_p;
  d["dev_r"] = rec.dev_r;
  d["dev_f"] = rec.dev_f;
  d["seconds"] = rec.seconds;
  return d;
}

const ZpInstance& instance_at(const Corpus& c, std::size_t i) {
  if (i >= c.instances.size()) throw py::index_error("instance index out of range");
  return c.instances[i];
}

}  // namespace

PYBIND11_MODULE(_zpr, m) {
  m.doc() = "Zero-pronoun antecedent selection with a REINFORCE-trained policy.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  py::class_<ToyCorpusOptions>(m, "ToyCorpusOptions")
      .def(py::init<>())
      .def_readwrite("n_docs", &ToyCorpusOptions::n_docs)
      .def_readwrite("min_candidates", &ToyCorpusOptions::min_candidates)
      .def_readwrite("max_candidates", &ToyCorpusOptions::max_candidates)
      .def_readwrite("min_gold", &ToyCorpusOptions::min_gold)
      .def_readwrite("max_gold", &ToyCorpusOptions::max_gold)
      .def_readwrite("vocab_size", &ToyCorpusOptions::vocab_size)
      .def_readwrite("seed", &ToyCorpusOptions::seed)
      .def_readwrite("set_dependent_fraction", &ToyCorpusOptions::set_dependent_fraction)
      .def_readwrite("zps_per_doc", &ToyCorpusOptions::zps_per_doc)
      .def_readwrite("n_markers", &ToyCorpusOptions::n_markers)
      .def_readwrite("source_tag", &ToyCorpusOptions::source_tag);

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", &load_corpus, py::arg("path"))
      .def_static("parse",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return parse_corpus(in);
                  },
                  py::arg("text"))
      .def("save", [](const Corpus& c, const std::string& path) { save_corpus(c, path); }, py::arg("path"))
      .def("dumps",
           [](const Corpus& c) {
             std::ostringstream os;
             write_corpus(c, os);
             return os.str();
           })
      .def_property_readonly("n_documents", [](const Corpus& c) { return c.documents.size(); })
      .def_property_readonly("n_instances", [](const Corpus& c) { return c.instances.size(); })
      .def_property_readonly("vocab_size", [](const Corpus& c) { return c.vocabulary.size(); })
      .def("gold", [](const Corpus& c, std::size_t i) { return instance_at(c, i).gold_antecedents; })
      .def("n_candidates", [](const Corpus& c, std::size_t i) { return instance_at(c, i).candidates.size(); })
      .def("summary",
           [](const Corpus& c) {
             const CorpusSummary s = summarize(c);
             py::dict d;
             d["documents"] = s.documents;
             d["sentences"] = s.sentences;
             d["instances"] = s.instances;
             d["candidates"] = s.candidates;
             d["gold_links"] = s.gold_links;
             return d;
           })
      .def("split", &split_train_dev, py::arg("dev_fraction") = kDefaultDevFraction, py::arg("seed") = 0)
      .def("__len__", [](const Corpus& c) { return c.instances.size(); });

  m.def("generate_toy_corpus", &generate_toy_corpus, py::arg("options") = ToyCorpusOptions{});

  py::enum_<Phase>(m, "Phase").value("PRETRAIN", Phase::kPretrain).value("RL", Phase::kRl);
  py::enum_<PretrainObjective>(m, "PretrainObjective")
      .value("GOLD_ACTIONS", PretrainObjective::kGoldActions)
      .value("GOLD_ONLY", PretrainObjective::kGoldOnly);

  py::class_<HyperConfig>(m, "HyperConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &HyperConfig::epochs)
      .def_readwrite("batch", &HyperConfig::batch)
      .def_readwrite("dropout", &HyperConfig::dropout)
      .def_readwrite("learning_rate", &HyperConfig::learning_rate)
      .def_readonly("phase", &HyperConfig::phase);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("pretrain", &TrainConfig::pretrain)
      .def_readwrite("rl", &TrainConfig::rl)
      .def_readwrite("run_rl", &TrainConfig::run_rl)
      .def_readwrite("use_baseline", &TrainConfig::use_baseline)
      .def_readwrite("objective", &TrainConfig::objective)
      .def_readwrite("reset_optimizer_between_phases", &TrainConfig::reset_optimizer_between_phases)
      .def_readwrite("rl_from_best_pretrain", &TrainConfig::rl_from_best_pretrain)
      .def_readwrite("dev_fraction", &TrainConfig::dev_fraction)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("split_seed", &TrainConfig::split_seed)
      .def_readwrite("d_emb", &TrainConfig::d_emb)
      .def_readwrite("d_hidden", &TrainConfig::d_hidden)
      .def_readwrite("hidden1", &TrainConfig::hidden1)
      .def_readwrite("hidden2", &TrainConfig::hidden2)
      .def("validate", &TrainConfig::validate);

  py::class_<Model>(m, "Model")
      .def_property_readonly("num_parameters", [](const Model& mdl) { return mdl.params().num_scalars(); })
      .def("parameter_names",
           [](const Model& mdl) {
             std::vector<std::string> names;
             for (const auto& p : mdl.params()) names.push_back(p.name);
             return names;
           })
      .def("parameter",
           [](const Model& mdl, const std::string& name) { return mdl.params()[name].value.values(); },
           py::arg("name"))
      .def("same_parameters", [](const Model& a, const Model& b) { return a.params().values_equal(b.params()); });

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("final_model", &TrainResult::final_model)
      .def_readonly("best_model", &TrainResult::best_model)
      .def_readonly("pretrained", &TrainResult::pretrained)
      .def_readonly("best_dev_f", &TrainResult::best_dev_f)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_phase", &TrainResult::best_phase)
      .def_property_readonly("log", [](const TrainResult& r) {
        py::list out;
        for (const auto& rec : r.log) out.append(record_dict(rec));
        return out;
      });

  m.def(
      "train", [](const Corpus& corpus, const TrainConfig& config) {
        py::gil_scoped_release release;
        return train(corpus, config);
      },
      py::arg("corpus"), py::arg("config") = TrainConfig{});

  m.def(
      "evaluate",
      [](const Model& model, const Corpus& corpus, bool macro, int workers) {
        return report_dict(evaluate(model, corpus, macro ? Averaging::kMacro : Averaging::kMicro, workers));
      },
      py::arg("model"), py::arg("corpus"), py::arg("macro") = false, py::arg("workers") = 1);
  m.def("predict", &greedy_predictions, py::arg("model"), py::arg("corpus"), py::arg("workers") = 1);

  m.def(
      "compute_reward",
      [](const std::vector<int>& predicted, const std::vector<int>& gold) { return compute_reward(predicted, gold); },
      py::arg("predicted"), py::arg("gold"));
  m.def(
      "exact_expected_reward",
      [](const Model& model, const Corpus& corpus, std::size_t index) {
        const ZpInstance& zp = instance_at(corpus, index);
        return exact_expected_reward(model, corpus.document_of(zp), zp);
      },
      py::arg("model"), py::arg("corpus"), py::arg("index") = 0);

  m.def(
      "run_oracle_suite",
      [](double eps, double tol, int seeds, std::uint64_t seed, std::size_t samples, std::size_t variance_samples,
         double init_scale, bool inject_wrong_sign) {
        OracleOptions o;
        o.eps = eps;
        o.tol = tol;
        o.gradient_seeds = seeds;
        o.seed = seed;
        o.estimator_samples = samples;
        o.variance_samples = variance_samples;
        o.init_scale = init_scale;
        o.inject_wrong_sign = inject_wrong_sign;
        OracleReport report;
        {
          py::gil_scoped_release release;
          report = run_oracle_suite(o);
        }
        py::list checks;
        for (const auto& c : report.checks) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["threshold"] = c.threshold;
          d["pass"] = c.pass;
          d["detail"] = c.detail;
          checks.append(d);
        }
        return checks;
      },
      py::arg("eps") = 1e-5, py::arg("tol") = 1e-4, py::arg("seeds") = 10, py::arg("seed") = 1,
      py::arg("samples") = 50000, py::arg("variance_samples") = 10000, py::arg("init_scale") = 0.5,
      py::arg("inject_wrong_sign") = false);

  m.def(
      "save_checkpoint",
      [](const Model& model, const Corpus& corpus, const std::string& path) {
        Checkpoint ck;
        ck.model = model;
        ck.vocabulary = corpus.vocabulary;
        save_checkpoint(ck, path);
      },
      py::arg("model"), py::arg("corpus"), py::arg("path"));
  m.def(
      "load_checkpoint", [](const std::string& path) { return load_checkpoint(path).model; }, py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  m.attr("FEATURE_VERSION") = std::string(kFeatureVersion);
  m.attr("FEATURE_NAMES") = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
}
