#include "audit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace audit {

namespace {

using nlohmann::json;

void dump_canonical(const json& doc, std::string& out) {
  switch (doc.type()) {
    case json::value_t::null:
      out += "null";
      break;
    case json::value_t::boolean:
      out += doc.get<bool>() ? "true" : "false";
      break;
    case json::value_t::string:
      out += json(doc.get_ref<const std::string&>()).dump();
      break;
    case json::value_t::number_integer:
      out += std::to_string(doc.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(doc.get<std::uint64_t>());
      break;
    case json::value_t::number_float: {
      const double value = doc.get<double>();
      if (!std::isfinite(value)) {
        out += "null";
        break;
      }
      char buffer[40];
      std::snprintf(buffer, sizeof(buffer), "%.17g", value);
      for (char* p = buffer; *p; ++p) {
        if (*p == ',') *p = '.';  // guard against a non-C numeric locale
      }
      out += buffer;
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : doc) {
        if (!first) out += ',';
        first = false;
        dump_canonical(item, out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      // nlohmann objects iterate in key-sorted order (std::map storage).
      out += '{';
      bool first = true;
      for (const auto& [key, value] : doc.items()) {
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        dump_canonical(value, out);
      }
      out += '}';
      break;
    }
    default:
      out += "null";
      break;
  }
}

const char* display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ZeroRule:
      return "Zero rule";
    case ModelKind::NB:
      return "Naive Bayes";
    case ModelKind::LR:
      return "Logistic regression";
    case ModelKind::MLP:
      return "MLP";
  }
  return "?";
}

std::string format_percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f%%", fraction * 100.0);
  for (char* p = buffer; *p; ++p) {
    if (*p == ',') *p = '.';
  }
  return buffer;
}

json metrics_to_json(const Metrics& m) {
  json doc;
  doc["f1"] = m.f1;
  doc["precision"] = m.precision;
  doc["recall"] = m.recall;
  doc["accuracy"] = m.accuracy;
  doc["confusion"] = json::array({json::array({m.confusion[0][0], m.confusion[0][1]}),
                                  json::array({m.confusion[1][0], m.confusion[1][1]})});
  doc["positive_class"] = m.positive_class;
  doc["degenerate"] = m.degenerate;
  return doc;
}

json fr_entries_to_json(std::span<const FrequencyRatioEntry> entries, std::size_t top_n) {
  json rows = json::array();
  for (const FrTableRow& row : render_fr_table(entries, top_n)) {
    json item;
    item["rank"] = row.rank;
    item["word"] = row.word;
    item["fr"] = row.fr;
    rows.push_back(std::move(item));
  }
  return rows;
}

const TaskResult* find_result(const GridResult& grid, TaskKind task, Scope scope,
                              ModelKind model) {
  for (const TaskResult& result : grid.results) {
    if (result.task.kind == task && result.scope == scope && result.model == model)
      return &result;
  }
  return nullptr;
}

std::vector<ModelKind> models_in_grid(const GridResult& grid) {
  std::vector<ModelKind> models;
  for (const TaskResult& result : grid.results) {
    bool seen = false;
    for (const ModelKind m : models) {
      if (m == result.model) seen = true;
    }
    if (!seen) models.push_back(result.model);
  }
  return models;
}

constexpr Scope kScopes[] = {Scope::Y1, Scope::Y2, Scope::Combined};

void append_grid_table(std::string& out, const GridResult& grid,
                       const std::vector<TaskKind>& tasks, const std::vector<ModelKind>& models,
                       bool use_accuracy) {
  out += "| Model |";
  for (const TaskKind task : tasks) {
    for (const Scope scope : kScopes) {
      out += ' ';
      out += to_string(task);
      out += ' ';
      out += to_string(scope);
      out += " |";
    }
  }
  out += "\n|---|";
  for (std::size_t i = 0; i < tasks.size() * 3; ++i) out += "---:|";
  out += '\n';
  for (const ModelKind model : models) {
    out += "| ";
    out += display_name(model);
    out += " |";
    for (const TaskKind task : tasks) {
      for (const Scope scope : kScopes) {
        const TaskResult* result = find_result(grid, task, scope, model);
        out += ' ';
        if (result == nullptr || result->skipped) {
          out += "skipped";
        } else {
          out += format_percent(use_accuracy ? result->mean_accuracy : result->mean_f1);
        }
        out += " |";
      }
    }
    out += '\n';
  }
}

}  // namespace

std::string canonical_json_dump(const json& doc) {
  std::string out;
  dump_canonical(doc, out);
  return out;
}

std::vector<FrTableRow> render_fr_table(std::span<const FrequencyRatioEntry> entries,
                                        std::size_t top_n) {
  std::vector<FrTableRow> rows;
  const std::size_t n = std::min(top_n, entries.size());
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(FrTableRow{i + 1, entries[i].token, entries[i].fr});
  }
  return rows;
}

double round_fr_display(double fr) {
  return static_cast<double>(llround(fr * 10.0)) / 10.0;
}

std::string format_fr_display(double fr) {
  const long long tenths = llround(fr * 10.0);  // half rounds up (away from zero)
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

json build_report_json(const GridResult& grid, const RunConfig& config) {
  json doc;
  doc["tool_version"] = kToolVersion;
  doc["seed"] = config.seed;
  doc["config_echo"] = config_echo(config);

  json corpus_stats = json::array();
  json fr_tables = json::array();
  for (const GridCell& cell : grid.cells) {
    json stats;
    stats["task"] = to_string(cell.task.kind);
    stats["scope"] = to_string(cell.scope);
    stats["class0_name"] = cell.task.class0_name;
    stats["class1_name"] = cell.task.class1_name;
    stats["built"] = cell.built;
    if (cell.built) {
      stats["students"] = cell.stats.students;
      stats["essays"] = cell.stats.essays;
      stats["class0_students"] = cell.stats.class_students[0];
      stats["class1_students"] = cell.stats.class_students[1];
      stats["class0_essays"] = cell.stats.class_essays[0];
      stats["class1_essays"] = cell.stats.class_essays[1];
      if (cell.median_used.has_value()) {
        stats["median_used"] = *cell.median_used;
      } else {
        stats["median_used"] = nullptr;
      }
    } else {
      stats["skip_reason"] = cell.skip_reason;
    }
    corpus_stats.push_back(std::move(stats));

    if (cell.built) {
      json table;
      table["task"] = to_string(cell.task.kind);
      table["scope"] = to_string(cell.scope);
      table["class0_name"] = cell.task.class0_name;
      table["class1_name"] = cell.task.class1_name;
      table["vocabulary_terms"] = cell.fr_class0.size();
      table["class0"] = fr_entries_to_json(cell.fr_class0, config.top_n_fr);
      table["class1"] = fr_entries_to_json(cell.fr_class1, config.top_n_fr);
      fr_tables.push_back(std::move(table));
    }
  }
  doc["corpus_stats"] = std::move(corpus_stats);
  doc["fr_tables"] = std::move(fr_tables);

  json results = json::array();
  for (const TaskResult& result : grid.results) {
    json row;
    row["model"] = to_string(result.model);
    row["task"] = to_string(result.task.kind);
    row["scope"] = to_string(result.scope);
    row["skipped"] = result.skipped;
    if (result.skipped) {
      row["skip_reason"] = result.skip_reason;
    } else {
      row["mean_f1"] = result.mean_f1;
      row["mean_accuracy"] = result.mean_accuracy;
      row["mean_f1_class0"] = result.mean_f1_class0;
      row["mean_f1_macro"] = result.mean_f1_macro;
      row["oov_test_tokens"] = result.oov_test_tokens;
      json folds = json::array();
      for (std::size_t i = 0; i < result.per_fold.size(); ++i) {
        json fold = metrics_to_json(result.per_fold[i]);
        fold["fold"] = i;
        fold["f1_class0"] = result.per_fold_f1_class0[i];
        folds.push_back(std::move(fold));
      }
      row["per_fold"] = std::move(folds);
    }
    results.push_back(std::move(row));
  }
  doc["grid"] = std::move(results);
  return doc;
}

std::string render_report_markdown(const GridResult& grid, const RunConfig& config) {
  std::string out;
  out += "# Corpus audit report\n\n";
  out += "Generated by corpus-audit ";
  out += kToolVersion;
  out += " with seed ";
  out += std::to_string(config.seed);
  out += ".\n\n";

  std::vector<TaskKind> tasks;
  for (const GridCell& cell : grid.cells) {
    bool seen = false;
    for (const TaskKind t : tasks) {
      if (t == cell.task.kind) seen = true;
    }
    if (!seen) tasks.push_back(cell.task.kind);
  }

  out += "## Corpus composition\n\n";
  for (const TaskKind task : tasks) {
    out += "### ";
    out += to_string(task);
    out += " task\n\n";
    const GridCell* first = nullptr;
    for (const GridCell& cell : grid.cells) {
      if (cell.task.kind == task) {
        first = &cell;
        break;
      }
    }
    const bool income = task == TaskKind::Income;
    out += "| Scope | Students | ";
    out += first->task.class1_name;
    out += " | ";
    out += first->task.class0_name;
    out += " | Essays |";
    if (income) out += " Median ($) |";
    out += "\n|---|---:|---:|---:|---:|";
    if (income) out += "---:|";
    out += '\n';
    std::vector<std::string> notes;
    for (const Scope scope : kScopes) {
      const GridCell* cell = nullptr;
      for (const GridCell& c : grid.cells) {
        if (c.task.kind == task && c.scope == scope) cell = &c;
      }
      if (cell == nullptr) continue;
      out += "| ";
      out += to_string(scope);
      out += " | ";
      if (cell->built) {
        out += std::to_string(cell->stats.students);
        out += " | ";
        out += std::to_string(cell->stats.class_students[1]);
        out += " | ";
        out += std::to_string(cell->stats.class_students[0]);
        out += " | ";
        out += std::to_string(cell->stats.essays);
        out += " |";
        if (income) {
          out += ' ';
          out += cell->median_used.has_value() ? std::to_string(*cell->median_used)
                                               : std::string("n/a");
          out += " |";
        }
      } else {
        out += "skipped | n/a | n/a | n/a |";
        if (income) out += " n/a |";
        notes.push_back(std::string(to_string(scope)) + ": " + cell->skip_reason);
      }
      out += '\n';
    }
    if (!notes.empty()) {
      out += '\n';
      for (const std::string& note : notes) {
        out += "- skipped ";
        out += note;
        out += '\n';
      }
    }
    out += '\n';
  }

  const std::vector<ModelKind> models = models_in_grid(grid);
  out += "## Mean accuracy (5-fold cross-validation)\n\n";
  append_grid_table(out, grid, tasks, models, true);
  out += "\n## Mean f1, positive class (5-fold cross-validation)\n\n";
  append_grid_table(out, grid, tasks, models, false);
  out += '\n';

  out += "## Most indicative words (smoothed frequency ratios)\n\n";
  bool any_table = false;
  for (const GridCell& cell : grid.cells) {
    if (!cell.built) continue;
    any_table = true;
    out += "### ";
    out += to_string(cell.task.kind);
    out += ", ";
    out += to_string(cell.scope);
    out += "\n\n| Rank | ";
    out += cell.task.class0_name;
    out += " word | FR | ";
    out += cell.task.class1_name;
    out += " word | FR |\n|---:|---|---:|---|---:|\n";
    const std::vector<FrTableRow> rows0 = render_fr_table(cell.fr_class0, config.top_n_fr);
    const std::vector<FrTableRow> rows1 = render_fr_table(cell.fr_class1, config.top_n_fr);
    const std::size_t rows = std::max(rows0.size(), rows1.size());
    for (std::size_t i = 0; i < rows; ++i) {
      out += "| ";
      out += std::to_string(i + 1);
      out += " | ";
      if (i < rows0.size()) {
        out += rows0[i].word;
        out += " | ";
        out += format_fr_display(rows0[i].fr);
      } else {
        out += "n/a | n/a";
      }
      out += " | ";
      if (i < rows1.size()) {
        out += rows1[i].word;
        out += " | ";
        out += format_fr_display(rows1[i].fr);
      } else {
        out += "n/a | n/a";
      }
      out += " |\n";
    }
    if (rows < config.top_n_fr) {
      out += "\nOnly ";
      out += std::to_string(rows);
      out += " of the requested ";
      out += std::to_string(config.top_n_fr);
      out += " rows: the vocabulary has fewer terms.\n";
    }
    out += '\n';
  }
  if (!any_table) out += "No task produced a labeled corpus; no ratio tables.\n";
  return out;
}

std::string predictions_to_jsonl(const GridResult& grid) {
  std::string out;
  for (const TaskResult& result : grid.results) {
    for (const EssayPrediction& pred : result.predictions) {
      json row;
      row["model"] = to_string(result.model);
      row["task"] = to_string(result.task.kind);
      row["scope"] = to_string(result.scope);
      row["essay_id"] = pred.essay_id;
      row["fold"] = pred.fold;
      row["gold"] = pred.gold;
      row["predicted"] = pred.predicted;
      row["score"] = pred.score;
      out += canonical_json_dump(row);
      out += '\n';
    }
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("report: cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("report: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace audit
