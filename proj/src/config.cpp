#include "audit/config.hpp"

#include <algorithm>

namespace audit {

namespace {

using nlohmann::json;

void expect_keys(const json& doc, std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(keys.begin(), keys.end(),
                     [&key](const char* k) { return key == k; }) == keys.end())
      throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

EarlyStopPolicy stop_policy_from_json(const json& doc, const EarlyStopPolicy& base,
                                      const std::string& where, bool allow_l2) {
  if (allow_l2) {
    expect_keys(doc,
                {"validation_fraction", "patience", "max_epochs", "learning_rate", "l2_lambda",
                 "batch_size"},
                where);
  } else {
    expect_keys(doc, {"validation_fraction", "patience", "max_epochs", "learning_rate",
                      "batch_size"},
                where);
  }
  EarlyStopPolicy policy = base;
  policy.validation_fraction = get_as(doc, "validation_fraction", policy.validation_fraction);
  policy.patience = get_as(doc, "patience", policy.patience);
  policy.max_epochs = get_as(doc, "max_epochs", policy.max_epochs);
  policy.learning_rate = get_as(doc, "learning_rate", policy.learning_rate);
  if (allow_l2) policy.l2_lambda = get_as(doc, "l2_lambda", policy.l2_lambda);
  policy.batch_size = get_as(doc, "batch_size", policy.batch_size);
  return policy;
}

json stop_policy_echo(const EarlyStopPolicy& policy, bool with_l2) {
  json doc;
  doc["validation_fraction"] = policy.validation_fraction;
  doc["patience"] = policy.patience;
  doc["max_epochs"] = policy.max_epochs;
  doc["learning_rate"] = policy.learning_rate;
  if (with_l2) doc["l2_lambda"] = policy.l2_lambda;
  doc["batch_size"] = policy.batch_size;
  return doc;
}

}  // namespace

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "gender") return TaskKind::Gender;
  if (name == "income") return TaskKind::Income;
  throw ConfigError("config: unknown task '" + name + "' (expected gender|income)");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "zerorule") return ModelKind::ZeroRule;
  if (name == "nb") return ModelKind::NB;
  if (name == "lr") return ModelKind::LR;
  if (name == "mlp") return ModelKind::MLP;
  throw ConfigError("config: unknown model '" + name + "' (expected zerorule|nb|lr|mlp)");
}

InputFormat input_format_from_string(const std::string& name) {
  if (name == "jsonl") return InputFormat::Jsonl;
  if (name == "csv") return InputFormat::Csv;
  throw ConfigError("config: unknown format '" + name + "' (expected jsonl|csv)");
}

Year year_tag_from_string(const std::string& name) {
  if (name == "Y1") return Year::Y1;
  if (name == "Y2") return Year::Y2;
  throw ConfigError("config: unknown cohort tag '" + name + "' (expected Y1|Y2)");
}

void apply_config_json(RunConfig& config, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  expect_keys(doc,
              {"input_path", "format", "year_map", "tasks", "models", "k", "seed", "min_chars",
               "income_floor", "nb_alpha", "min_doc_freq", "lr_policy", "mlp_policy", "top_n_fr",
               "output_dir", "emit_per_essay", "threads"},
              "top level");
  config.input_path = get_as<std::string>(doc, "input_path", config.input_path);
  if (doc.contains("format"))
    config.format = input_format_from_string(doc.at("format").get<std::string>());
  if (doc.contains("year_map")) {
    if (!doc.at("year_map").is_object())
      throw ConfigError("config: year_map must be an object of year -> Y1|Y2");
    YearMap map;
    for (const auto& [key, value] : doc.at("year_map").items()) {
      if (!value.is_string()) throw ConfigError("config: year_map values must be Y1|Y2");
      map.emplace(key, year_tag_from_string(value.get<std::string>()));
    }
    config.year_map = std::move(map);
  }
  if (doc.contains("tasks")) {
    std::vector<TaskKind> tasks;
    for (const auto& item : doc.at("tasks")) {
      tasks.push_back(task_kind_from_string(item.get<std::string>()));
    }
    if (tasks.empty()) throw ConfigError("config: tasks must not be empty");
    config.tasks = std::move(tasks);
  }
  if (doc.contains("models")) {
    std::vector<ModelKind> models;
    for (const auto& item : doc.at("models")) {
      models.push_back(model_kind_from_string(item.get<std::string>()));
    }
    config.models = std::move(models);
  }
  config.k = get_as(doc, "k", config.k);
  config.seed = get_as(doc, "seed", config.seed);
  config.min_chars = get_as(doc, "min_chars", config.min_chars);
  config.income_floor = get_as(doc, "income_floor", config.income_floor);
  config.nb_alpha = get_as(doc, "nb_alpha", config.nb_alpha);
  config.min_doc_freq = get_as(doc, "min_doc_freq", config.min_doc_freq);
  if (doc.contains("lr_policy"))
    config.lr_policy = stop_policy_from_json(doc.at("lr_policy"), config.lr_policy,
                                             "lr_policy", true);
  if (doc.contains("mlp_policy")) {
    const json& mp = doc.at("mlp_policy");
    expect_keys(mp,
                {"validation_fraction", "patience", "max_epochs", "learning_rate", "batch_size",
                 "hidden_size", "dropout_rate", "l2_lambda"},
                "mlp_policy");
    config.mlp_policy.stop = stop_policy_from_json(
        json{{"validation_fraction", mp.value("validation_fraction",
                                              config.mlp_policy.stop.validation_fraction)},
             {"patience", mp.value("patience", config.mlp_policy.stop.patience)},
             {"max_epochs", mp.value("max_epochs", config.mlp_policy.stop.max_epochs)},
             {"learning_rate", mp.value("learning_rate", config.mlp_policy.stop.learning_rate)},
             {"batch_size", mp.value("batch_size", config.mlp_policy.stop.batch_size)}},
        config.mlp_policy.stop, "mlp_policy", false);
    config.mlp_policy.hidden_size = get_as(mp, "hidden_size", config.mlp_policy.hidden_size);
    config.mlp_policy.dropout_rate = get_as(mp, "dropout_rate", config.mlp_policy.dropout_rate);
    config.mlp_policy.l2_lambda = get_as(mp, "l2_lambda", config.mlp_policy.l2_lambda);
  }
  config.top_n_fr = get_as(doc, "top_n_fr", config.top_n_fr);
  config.output_dir = get_as<std::string>(doc, "output_dir", config.output_dir);
  config.emit_per_essay = get_as(doc, "emit_per_essay", config.emit_per_essay);
  config.threads = get_as(doc, "threads", config.threads);
}

json config_echo(const RunConfig& config) {
  json doc;
  doc["input_path"] = config.input_path;
  doc["format"] = config.format == InputFormat::Jsonl ? "jsonl" : "csv";
  json year_map = json::object();
  for (const auto& [key, value] : config.year_map) year_map[key] = to_string(value);
  doc["year_map"] = std::move(year_map);
  json tasks = json::array();
  for (const TaskKind t : config.tasks) tasks.push_back(to_string(t));
  doc["tasks"] = std::move(tasks);
  json models = json::array();
  for (const ModelKind m : config.models) models.push_back(to_string(m));
  doc["models"] = std::move(models);
  doc["k"] = config.k;
  doc["seed"] = config.seed;
  doc["min_chars"] = config.min_chars;
  doc["income_floor"] = config.income_floor;
  doc["nb_alpha"] = config.nb_alpha;
  doc["min_doc_freq"] = config.min_doc_freq;
  doc["lr_policy"] = stop_policy_echo(config.lr_policy, true);
  doc["mlp_policy"] = stop_policy_echo(config.mlp_policy.stop, false);
  doc["mlp_policy"]["hidden_size"] = config.mlp_policy.hidden_size;
  doc["mlp_policy"]["dropout_rate"] = config.mlp_policy.dropout_rate;
  doc["mlp_policy"]["l2_lambda"] = config.mlp_policy.l2_lambda;
  doc["top_n_fr"] = config.top_n_fr;
  doc["output_dir"] = config.output_dir;
  doc["emit_per_essay"] = config.emit_per_essay;
  doc["threads"] = config.threads;
  return doc;
}

GridSettings to_grid_settings(const RunConfig& config) {
  GridSettings settings;
  settings.train.nb_alpha = config.nb_alpha;
  settings.train.min_doc_freq = config.min_doc_freq;
  settings.train.lr_policy = config.lr_policy;
  settings.train.mlp_policy = config.mlp_policy;
  settings.train.seed = config.seed;
  settings.train.record_predictions = config.emit_per_essay;
  settings.k = config.k;
  settings.income_floor = config.income_floor;
  settings.tasks = config.tasks;
  settings.models = config.models;
  settings.top_n_fr = config.top_n_fr;
  settings.threads = config.threads;
  return settings;
}

}  // namespace audit
