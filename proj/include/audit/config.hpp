#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "audit/corpus.hpp"
#include "audit/eval.hpp"
#include "json.hpp"

namespace audit {

// Resolved run configuration: built from defaults, overlaid by an optional
// JSON config file, then by command-line flags.
struct RunConfig {
  std::string input_path;
  InputFormat format = InputFormat::Jsonl;
  YearMap year_map = default_year_map();
  std::vector<TaskKind> tasks = {TaskKind::Gender, TaskKind::Income};
  std::vector<ModelKind> models = {ModelKind::NB, ModelKind::LR, ModelKind::MLP};
  int k = 5;
  std::uint64_t seed = 0;
  std::size_t min_chars = 100;
  long long income_floor = 10000;
  double nb_alpha = 1.0;
  std::size_t min_doc_freq = 1;
  EarlyStopPolicy lr_policy{};
  MlpPolicy mlp_policy{};
  std::size_t top_n_fr = 10;
  std::string output_dir = ".";
  bool emit_per_essay = false;
  int threads = 0;  // 0 = hardware concurrency
};

TaskKind task_kind_from_string(const std::string& name);       // ConfigError on unknown
ModelKind model_kind_from_string(const std::string& name);     // ConfigError on unknown
InputFormat input_format_from_string(const std::string& name); // ConfigError on unknown
Year year_tag_from_string(const std::string& name);            // ConfigError on unknown

// Overlays values from a JSON config document; unknown keys are ConfigErrors.
void apply_config_json(RunConfig& config, const nlohmann::json& doc);

// Full resolved configuration, embedded in reports.
nlohmann::json config_echo(const RunConfig& config);

GridSettings to_grid_settings(const RunConfig& config);

}  // namespace audit
