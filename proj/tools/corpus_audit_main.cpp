// corpus-audit: quantifies how strongly author demographics can be inferred
// from essay text, via cross-validated classifiers and ratio tables.
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "audit/config.hpp"
#include "audit/corpus.hpp"
#include "audit/eval.hpp"
#include "audit/report.hpp"
#include "audit/synth.hpp"
#include "json.hpp"

namespace {

using audit::ConfigError;
using audit::DataError;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CliOverrides {
  std::string config_path;
  std::string input_path;
  std::string format;
  std::vector<std::string> tasks;
  std::vector<std::string> models;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> min_chars;
  std::optional<long long> income_floor;
  std::optional<double> nb_alpha;
  std::optional<std::size_t> min_doc_freq;
  std::optional<std::size_t> top_n_fr;
  std::string output_dir;
  bool emit_per_essay = false;
  std::optional<int> threads;
};

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string(what) + ": cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + path + " is not valid JSON: " + e.what());
  }
}

audit::RunConfig resolve_config(const CliOverrides& cli) {
  audit::RunConfig config;
  if (!cli.config_path.empty()) {
    audit::apply_config_json(config, load_json_file(cli.config_path, "config"));
  }
  if (!cli.input_path.empty()) config.input_path = cli.input_path;
  if (!cli.format.empty()) config.format = audit::input_format_from_string(cli.format);
  if (!cli.tasks.empty()) {
    config.tasks.clear();
    for (const std::string& name : cli.tasks) {
      config.tasks.push_back(audit::task_kind_from_string(name));
    }
  }
  if (!cli.models.empty()) {
    config.models.clear();
    for (const std::string& name : cli.models) {
      config.models.push_back(audit::model_kind_from_string(name));
    }
  }
  if (cli.k) config.k = *cli.k;
  if (cli.seed) config.seed = *cli.seed;
  if (cli.min_chars) config.min_chars = *cli.min_chars;
  if (cli.income_floor) config.income_floor = *cli.income_floor;
  if (cli.nb_alpha) config.nb_alpha = *cli.nb_alpha;
  if (cli.min_doc_freq) config.min_doc_freq = *cli.min_doc_freq;
  if (cli.top_n_fr) config.top_n_fr = *cli.top_n_fr;
  if (!cli.output_dir.empty()) config.output_dir = cli.output_dir;
  if (cli.emit_per_essay) config.emit_per_essay = true;
  if (cli.threads) config.threads = *cli.threads;
  // The environment caps whatever the config asked for (0 = auto).
  if (const char* env = std::getenv("CORPUS_AUDIT_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && (config.threads <= 0 || config.threads > cap)) config.threads = cap;
    } catch (const std::exception&) {
      throw ConfigError("CORPUS_AUDIT_THREADS must be an integer");
    }
  }
  if (config.input_path.empty()) throw ConfigError("no input file given (--input or config)");
  return config;
}

std::vector<audit::RawRecord> load_records(const audit::RunConfig& config) {
  std::ifstream in(config.input_path, std::ios::binary);
  if (!in) throw DataError("input: cannot read " + config.input_path);
  audit::IngestResult ingested = audit::ingest(in, config.format, config.year_map);
  for (const audit::IngestError& err : ingested.errors) {
    std::cerr << "warning: line " << err.line;
    if (!err.essay_id.empty()) std::cerr << " (essay " << err.essay_id << ")";
    if (!err.field.empty()) std::cerr << " field " << err.field;
    std::cerr << ": " << err.message << "\n";
  }
  return audit::filter_min_length(ingested.records, config.min_chars);
}

int cmd_audit(const CliOverrides& cli) {
  const audit::RunConfig config = resolve_config(cli);
  const std::vector<audit::RawRecord> records = load_records(config);
  std::cerr << "audit: " << records.size() << " essays after length filter\n";
  const audit::GridSettings settings = audit::to_grid_settings(config);
  const audit::GridResult grid = audit::run_grid(records, settings);
  for (const audit::TaskResult& result : grid.results) {
    std::cerr << "task " << to_string(result.task.kind) << "/" << to_string(result.scope)
              << " model " << to_string(result.model);
    if (result.skipped) {
      std::cerr << ": skipped (" << result.skip_reason << ")\n";
    } else {
      std::cerr << ": mean_f1 " << result.mean_f1 << " mean_accuracy " << result.mean_accuracy
                << "\n";
    }
  }
  const std::filesystem::path out_dir(config.output_dir.empty() ? "." : config.output_dir);
  std::filesystem::create_directories(out_dir);
  const json report = audit::build_report_json(grid, config);
  audit::write_file_atomic(out_dir / "report.json", audit::canonical_json_dump(report));
  audit::write_file_atomic(out_dir / "report.md", audit::render_report_markdown(grid, config));
  if (config.emit_per_essay) {
    audit::write_file_atomic(out_dir / "predictions.jsonl", audit::predictions_to_jsonl(grid));
  }
  std::cerr << "audit: wrote " << (out_dir / "report.json").string() << " and "
            << (out_dir / "report.md").string() << "\n";
  return kExitOk;
}

int cmd_stats(const CliOverrides& cli) {
  const audit::RunConfig config = resolve_config(cli);
  const std::vector<audit::RawRecord> records = load_records(config);
  std::cout << "| Scope | Students | Female | Male | Essays |\n";
  std::cout << "|---|---:|---:|---:|---:|\n";
  for (const audit::Scope scope :
       {audit::Scope::Y1, audit::Scope::Y2, audit::Scope::Combined}) {
    const audit::ScopeSummary summary = audit::scope_summary(records, scope);
    std::cout << "| " << to_string(scope) << " | " << summary.students << " | " << summary.female
              << " | " << summary.male << " | " << summary.essays << " |\n";
  }
  return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
  audit::SynthSpec spec;  // defaults when no spec file is given
  if (!spec_path.empty()) {
    spec = audit::synth_spec_from_json(load_json_file(spec_path, "synth spec"));
  }
  const std::vector<audit::RawRecord> records = audit::generate(spec);
  audit::write_file_atomic(out_path, audit::records_to_jsonl(records));
  const audit::BayesEstimate estimate = audit::bayes_optimal_accuracy(spec, 200000);
  std::cout << "essays: " << records.size() << "\n";
  std::cout << "bayes_optimal_accuracy: " << estimate.accuracy << " (stderr " << estimate.std_error
            << ")\n";
  std::cerr << "synth: wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus-audit: demographic-signal audit over an essay corpus"};
  app.require_subcommand(1);

  CliOverrides cli;
  std::string spec_path;
  std::string synth_out = "synthetic.jsonl";

  const auto add_common = [&cli](CLI::App* cmd) {
    cmd->add_option("--config", cli.config_path, "JSON config file (flags override it)");
    cmd->add_option("--input", cli.input_path, "input corpus path");
    cmd->add_option("--format", cli.format, "input format: jsonl|csv");
    cmd->add_option("--min-chars", cli.min_chars, "drop essays shorter than this many characters");
    cmd->add_option("--threads", cli.threads, "worker threads (0 = auto)");
  };

  CLI::App* audit_cmd = app.add_subcommand("audit", "run the full audit and write reports");
  add_common(audit_cmd);
  audit_cmd->add_option("--tasks", cli.tasks, "tasks to audit: gender|income")
      ->delimiter(',');
  audit_cmd->add_option("--models", cli.models, "models: zerorule|nb|lr|mlp")->delimiter(',');
  audit_cmd->add_option("--k", cli.k, "cross-validation folds");
  audit_cmd->add_option("--seed", cli.seed, "seed for folds, training and dropout");
  audit_cmd->add_option("--income-floor", cli.income_floor, "drop incomes below this");
  audit_cmd->add_option("--nb-alpha", cli.nb_alpha, "additive smoothing constant");
  audit_cmd->add_option("--min-doc-freq", cli.min_doc_freq,
                        "keep tokens appearing in at least this many documents");
  audit_cmd->add_option("--top-n-fr", cli.top_n_fr, "rows per frequency-ratio table");
  audit_cmd->add_option("--output-dir", cli.output_dir, "directory for report files");
  audit_cmd->add_flag("--emit-per-essay", cli.emit_per_essay,
                      "also write per-essay predictions (predictions.jsonl)");

  CLI::App* stats_cmd = app.add_subcommand("stats", "print per-cohort corpus composition");
  add_common(stats_cmd);

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic corpus with a planted signal");
  synth_cmd->add_option("--spec", spec_path, "generator spec (JSON)");
  synth_cmd->add_option("--out", synth_out, "output JSONL path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (audit_cmd->parsed()) return cmd_audit(cli);
    if (stats_cmd->parsed()) return cmd_stats(cli);
    return cmd_synth(spec_path, synth_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
