// Python bindings for the corpus-audit core: tokenization, vectorization, the
// three classifiers, synthetic corpus generation and the full audit pipeline.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "audit/config.hpp"
#include "audit/corpus.hpp"
#include "audit/eval.hpp"
#include "audit/linear.hpp"
#include "audit/mlp.hpp"
#include "audit/nb.hpp"
#include "audit/report.hpp"
#include "audit/synth.hpp"
#include "audit/tokenizer.hpp"
#include "audit/types.hpp"
#include "audit/vectorizer.hpp"

namespace py = pybind11;
using namespace audit;

namespace {

SynthSpec parse_spec(const std::string& spec_json) {
  return synth_spec_from_json(nlohmann::json::parse(spec_json));
}

py::dict audit_jsonl(const std::string& jsonl_text, const std::string& config_json) {
  RunConfig config;
  if (!config_json.empty()) apply_config_json(config, nlohmann::json::parse(config_json));
  std::istringstream in(jsonl_text);
  const IngestResult ingested = ingest(in, config.format, config.year_map);
  const std::vector<RawRecord> records = filter_min_length(ingested.records, config.min_chars);
  const GridResult grid = run_grid(records, to_grid_settings(config));

  py::dict out;
  out["report_json"] = canonical_json_dump(build_report_json(grid, config));
  out["report_md"] = render_report_markdown(grid, config);
  out["ingest_errors"] = ingested.errors.size();
  if (config.emit_per_essay) out["predictions_jsonl"] = predictions_to_jsonl(grid);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Corpus-auditing toolkit: quantify how much essay text reveals about "
            "author demographics.";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::enum_<Gender>(m, "Gender").value("Male", Gender::Male).value("Female", Gender::Female);
  py::enum_<Year>(m, "Year").value("Y1", Year::Y1).value("Y2", Year::Y2);

  py::class_<RawRecord>(m, "RawRecord")
      .def(py::init<>())
      .def_readwrite("student_id", &RawRecord::student_id)
      .def_readwrite("essay_id", &RawRecord::essay_id)
      .def_readwrite("year", &RawRecord::year)
      .def_readwrite("text", &RawRecord::text)
      .def_readwrite("income", &RawRecord::income)
      .def_readwrite("gender", &RawRecord::gender)
      .def("__repr__", [](const RawRecord& r) {
        return "<RawRecord " + r.essay_id + " of " + r.student_id + ">";
      });

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_readonly("tokens", &Vocabulary::tokens)
      .def("size", &Vocabulary::size)
      .def("find", &Vocabulary::find, py::arg("token"))
      .def("__len__", &Vocabulary::size);

  py::class_<CountVector>(m, "CountVector")
      .def(py::init<>())
      .def_readwrite("pairs", &CountVector::pairs)
      .def_readwrite("total_tokens", &CountVector::total_tokens);

  py::class_<NBModel>(m, "NBModel")
      .def_readonly("log_prior", &NBModel::log_prior)
      .def_readonly("alpha", &NBModel::alpha)
      .def_readonly("vocab_size", &NBModel::vocab_size)
      .def("log_likelihood", [](const NBModel& model, int cls) {
        if (cls != 0 && cls != 1) throw py::value_error("class must be 0 or 1");
        return model.log_likelihood[static_cast<std::size_t>(cls)];
      }, py::arg("cls"));

  py::class_<NBPrediction>(m, "NBPrediction")
      .def_readonly("label", &NBPrediction::label)
      .def_readonly("log_scores", &NBPrediction::log_scores);

  py::class_<FrequencyRatioEntry>(m, "FrequencyRatioEntry")
      .def_readonly("token", &FrequencyRatioEntry::token)
      .def_readonly("fr", &FrequencyRatioEntry::fr)
      .def("__repr__", [](const FrequencyRatioEntry& e) {
        return "<FrequencyRatioEntry " + e.token + " " + std::to_string(e.fr) + ">";
      });

  py::class_<EarlyStopPolicy>(m, "EarlyStopPolicy")
      .def(py::init<>())
      .def_readwrite("validation_fraction", &EarlyStopPolicy::validation_fraction)
      .def_readwrite("patience", &EarlyStopPolicy::patience)
      .def_readwrite("max_epochs", &EarlyStopPolicy::max_epochs)
      .def_readwrite("learning_rate", &EarlyStopPolicy::learning_rate)
      .def_readwrite("l2_lambda", &EarlyStopPolicy::l2_lambda)
      .def_readwrite("batch_size", &EarlyStopPolicy::batch_size);

  py::class_<MlpPolicy>(m, "MlpPolicy")
      .def(py::init<>())
      .def_readwrite("stop", &MlpPolicy::stop)
      .def_readwrite("hidden_size", &MlpPolicy::hidden_size)
      .def_readwrite("dropout_rate", &MlpPolicy::dropout_rate)
      .def_readwrite("l2_lambda", &MlpPolicy::l2_lambda);

  py::class_<LRModel>(m, "LRModel")
      .def_readonly("weights", &LRModel::weights)
      .def_readonly("bias", &LRModel::bias)
      .def_readonly("training_trace", &LRModel::training_trace);

  py::class_<LRPrediction>(m, "LRPrediction")
      .def_readonly("label", &LRPrediction::label)
      .def_readonly("probability", &LRPrediction::probability);

  py::class_<MLPModel>(m, "MLPModel")
      .def_readonly("input_size", &MLPModel::input_size)
      .def_readonly("hidden_size", &MLPModel::hidden_size)
      .def_readonly("dropout_rate", &MLPModel::dropout_rate)
      .def_readonly("l2_lambda", &MLPModel::l2_lambda)
      .def_readonly("training_trace", &MLPModel::training_trace);

  py::class_<MlpPrediction>(m, "MlpPrediction")
      .def_readonly("label", &MlpPrediction::label)
      .def_readonly("probability", &MlpPrediction::probability);

  m.def("tokenize", [](std::string_view text) { return tokenize(text); }, py::arg("text"),
        "Lowercased word tokens; internal apostrophes survive, punctuation splits.");
  m.def("utf8_length", [](std::string_view s) { return utf8_length(s); }, py::arg("text"),
        "Number of Unicode scalar values in a UTF-8 string.");
  m.def("build_vocabulary", &build_vocabulary, py::arg("docs"), py::arg("min_doc_freq") = 1,
        "Sorted token -> index map over the given token sequences.");
  m.def("vectorize",
        [](const TokenSeq& seq, const Vocabulary& vocab) { return vectorize(seq, vocab); },
        py::arg("tokens"), py::arg("vocab"),
        "Sparse counts of in-vocabulary tokens; out-of-vocabulary tokens are dropped.");

  m.def("nb_train",
        [](const std::vector<CountVector>& vectors, const std::vector<int>& labels,
           std::uint32_t vocab_size, double alpha) {
          return nb_train(vectors, labels, vocab_size, alpha);
        },
        py::arg("vectors"), py::arg("labels"), py::arg("vocab_size"), py::arg("alpha") = 1.0,
        "Multinomial naive Bayes with additive smoothing.");
  m.def("nb_predict", &nb_predict, py::arg("model"), py::arg("vec"));
  m.def("frequency_ratios", &frequency_ratios, py::arg("model"), py::arg("vocab"),
        py::arg("numerator_class"),
        "Smoothed per-token likelihood ratios, sorted by descending ratio.");

  m.def("lr_train",
        [](const std::vector<CountVector>& vectors, const std::vector<int>& labels,
           std::uint32_t vocab_size, const EarlyStopPolicy& policy, std::uint64_t seed) {
          return lr_train(vectors, labels, vocab_size, policy, seed);
        },
        py::arg("vectors"), py::arg("labels"), py::arg("vocab_size"),
        py::arg("policy") = EarlyStopPolicy{}, py::arg("seed") = 0,
        "Logistic regression by mini-batch descent with early stopping.");
  m.def("lr_predict", &lr_predict, py::arg("model"), py::arg("vec"));

  m.def("mlp_train",
        [](const std::vector<CountVector>& vectors, const std::vector<int>& labels,
           std::uint32_t vocab_size, const MlpPolicy& policy, std::uint64_t seed) {
          return mlp_train(vectors, labels, vocab_size, policy, seed);
        },
        py::arg("vectors"), py::arg("labels"), py::arg("vocab_size"),
        py::arg("policy") = MlpPolicy{}, py::arg("seed") = 0,
        "Single-hidden-layer network with inverted dropout and early stopping.");
  m.def("mlp_predict", &mlp_predict, py::arg("model"), py::arg("vec"));

  m.def("generate",
        [](const std::string& spec_json) { return generate(parse_spec(spec_json)); },
        py::arg("spec_json"),
        "Synthetic essay records from a generator specification (JSON string).");
  m.def("records_to_jsonl", &records_to_jsonl, py::arg("records"),
        "One JSON line per record, keys sorted.");
  m.def("bayes_optimal_accuracy",
        [](const std::string& spec_json, std::size_t n_trials) {
          const BayesEstimate est = bayes_optimal_accuracy(parse_spec(spec_json), n_trials);
          return py::make_tuple(est.accuracy, est.std_error);
        },
        py::arg("spec_json"), py::arg("n_trials") = 200000,
        "Monte-Carlo accuracy of the optimal classifier for a generator spec; "
        "returns (accuracy, standard_error).");

  m.def("audit_jsonl", &audit_jsonl, py::arg("jsonl_text"), py::arg("config_json") = "{}",
        "Full audit over JSONL essay records. Returns a dict with report_json, "
        "report_md, ingest_errors and, when configured, predictions_jsonl.");
}
