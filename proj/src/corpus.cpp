#include "audit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "audit/tokenizer.hpp"
#include "json.hpp"

namespace audit {

namespace {

using nlohmann::json;

struct RowSink {
  const YearMap& year_map;
  IngestResult out;
  std::unordered_set<std::string> seen_essay_ids;

  void fail(std::size_t line, std::string essay_id, std::string field, std::string message) {
    out.errors.push_back({line, std::move(essay_id), std::move(field), std::move(message)});
  }

  void accept(std::size_t line, RawRecord rec) {
    if (!seen_essay_ids.insert(rec.essay_id).second)
      throw DataError("ingest: duplicate essay_id '" + rec.essay_id + "' at line " +
                      std::to_string(line));
    out.records.push_back(std::move(rec));
  }

  bool map_year(const std::string& raw, Year& year) const {
    const auto it = year_map.find(raw);
    if (it == year_map.end()) return false;
    year = it->second;
    return true;
  }
};

void ingest_jsonl_line(RowSink& sink, std::size_t line_no, const std::string& line) {
  const json row = json::parse(line, nullptr, false);
  if (row.is_discarded() || !row.is_object()) {
    sink.fail(line_no, "", "", "not a JSON object");
    return;
  }
  std::string essay_id;
  if (row.contains("essay_id") && row["essay_id"].is_string())
    essay_id = row["essay_id"].get<std::string>();

  RawRecord rec;
  rec.essay_id = essay_id;
  if (essay_id.empty()) {
    sink.fail(line_no, "", "essay_id", "missing or non-string essay_id");
    return;
  }
  if (!row.contains("student_id") || !row["student_id"].is_string() ||
      row["student_id"].get<std::string>().empty()) {
    sink.fail(line_no, essay_id, "student_id", "missing or non-string student_id");
    return;
  }
  rec.student_id = row["student_id"].get<std::string>();
  if (!row.contains("text") || !row["text"].is_string()) {
    sink.fail(line_no, essay_id, "text", "missing or non-string text");
    return;
  }
  rec.text = row["text"].get<std::string>();
  if (!row.contains("year") || !row["year"].is_string()) {
    sink.fail(line_no, essay_id, "year", "missing or non-string year");
    return;
  }
  if (!sink.map_year(row["year"].get<std::string>(), rec.year)) {
    sink.fail(line_no, essay_id, "year",
              "unmapped year value '" + row["year"].get<std::string>() + "'");
    return;
  }
  if (row.contains("gender") && !row["gender"].is_null()) {
    if (!row["gender"].is_string()) {
      sink.fail(line_no, essay_id, "gender", "gender must be \"Male\", \"Female\" or null");
      return;
    }
    const std::string g = row["gender"].get<std::string>();
    if (g == "Male") {
      rec.gender = Gender::Male;
    } else if (g == "Female") {
      rec.gender = Gender::Female;
    } else {
      sink.fail(line_no, essay_id, "gender", "unrecognized gender '" + g + "'");
      return;
    }
  }
  if (row.contains("income") && !row["income"].is_null()) {
    if (!row["income"].is_number_integer() && !row["income"].is_number_unsigned()) {
      sink.fail(line_no, essay_id, "income", "income must be an integer or null");
      return;
    }
    const long long v = row["income"].get<long long>();
    if (v < 0) {
      sink.fail(line_no, essay_id, "income", "income must be non-negative");
      return;
    }
    rec.income = v;
  }
  sink.accept(line_no, std::move(rec));
}

IngestResult ingest_jsonl(std::istream& in, const YearMap& year_map) {
  RowSink sink{year_map, {}, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ingest_jsonl_line(sink, line_no, line);
  }
  return std::move(sink.out);
}

// RFC 4180-style record reader: quoted fields may contain commas, doubled
// quotes and newlines. Returns false at end of stream.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no,
                     std::size_t& start_line) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  ++line_no;
  start_line = line_no;
  std::string field;
  bool quoted = false;
  while (true) {
    if (c == EOF) {
      fields.push_back(std::move(field));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        const int next = in.peek();
        if (next == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
}

IngestResult ingest_csv(std::istream& in, const YearMap& year_map) {
  static const std::vector<std::string> kColumns = {"student_id", "essay_id", "year",
                                                    "text",       "gender",   "income"};
  RowSink sink{year_map, {}, {}};
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  std::size_t start_line = 0;
  if (!read_csv_record(in, fields, line_no, start_line))
    throw DataError("ingest: missing CSV header row");
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (std::find(kColumns.begin(), kColumns.end(), fields[i]) == kColumns.end())
      throw DataError("ingest: unknown CSV column '" + fields[i] + "'");
    if (!col.emplace(fields[i], i).second)
      throw DataError("ingest: duplicate CSV column '" + fields[i] + "'");
  }
  for (const std::string& name : kColumns) {
    if (!col.count(name)) throw DataError("ingest: missing CSV column '" + name + "'");
  }

  while (read_csv_record(in, fields, line_no, start_line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != col.size()) {
      sink.fail(start_line, "", "", "wrong number of CSV fields");
      continue;
    }
    const std::string& essay_id = fields[col["essay_id"]];
    RawRecord rec;
    rec.essay_id = essay_id;
    if (essay_id.empty()) {
      sink.fail(start_line, "", "essay_id", "missing essay_id");
      continue;
    }
    rec.student_id = fields[col["student_id"]];
    if (rec.student_id.empty()) {
      sink.fail(start_line, essay_id, "student_id", "missing student_id");
      continue;
    }
    rec.text = fields[col["text"]];
    const std::string& year_raw = fields[col["year"]];
    if (year_raw.empty() || !sink.map_year(year_raw, rec.year)) {
      sink.fail(start_line, essay_id, "year", "unmapped year value '" + year_raw + "'");
      continue;
    }
    const std::string& gender_raw = fields[col["gender"]];
    if (!gender_raw.empty()) {
      if (gender_raw == "Male") {
        rec.gender = Gender::Male;
      } else if (gender_raw == "Female") {
        rec.gender = Gender::Female;
      } else {
        sink.fail(start_line, essay_id, "gender", "unrecognized gender '" + gender_raw + "'");
        continue;
      }
    }
    const std::string& income_raw = fields[col["income"]];
    if (!income_raw.empty()) {
      long long v = 0;
      const auto [ptr, ec] =
          std::from_chars(income_raw.data(), income_raw.data() + income_raw.size(), v);
      if (ec != std::errc() || ptr != income_raw.data() + income_raw.size() || v < 0) {
        sink.fail(start_line, essay_id, "income",
                  "income must be a non-negative integer, got '" + income_raw + "'");
        continue;
      }
      rec.income = v;
    }
    sink.accept(start_line, std::move(rec));
  }
  return std::move(sink.out);
}

// First reported value among the student's in-scope records wins; demographics
// are student-level attributes, so every essay of a student gets one label.
template <class T, class Getter>
std::unordered_map<std::string, T> resolve_student_attribute(
    const std::vector<RawRecord>& records, Scope scope, Getter get) {
  std::unordered_map<std::string, T> resolved;
  for (const RawRecord& rec : records) {
    if (!in_scope(rec.year, scope)) continue;
    const auto value = get(rec);
    if (!value) continue;
    resolved.emplace(rec.student_id, *value);
  }
  return resolved;
}

}  // namespace

IngestResult ingest(std::istream& in, InputFormat format, const YearMap& year_map) {
  if (!in) throw DataError("ingest: unreadable input stream");
  return format == InputFormat::Jsonl ? ingest_jsonl(in, year_map) : ingest_csv(in, year_map);
}

std::vector<RawRecord> filter_min_length(const std::vector<RawRecord>& records,
                                         std::size_t min_chars) {
  std::vector<RawRecord> kept;
  kept.reserve(records.size());
  for (const RawRecord& rec : records) {
    if (utf8_length(rec.text) >= min_chars) kept.push_back(rec);
  }
  return kept;
}

LabeledCorpus build_gender_corpus(const std::vector<RawRecord>& records, Scope scope) {
  const auto gender_of = resolve_student_attribute<Gender>(
      records, scope, [](const RawRecord& r) { return r.gender; });

  LabeledCorpus corpus;
  corpus.task = AuditTask::gender();
  corpus.scope = scope;
  std::array<std::unordered_set<std::string>, 2> class_students;
  for (const RawRecord& rec : records) {
    if (!in_scope(rec.year, scope)) continue;
    const auto it = gender_of.find(rec.student_id);
    if (it == gender_of.end()) continue;  // student never reported gender
    const int label = it->second == Gender::Female ? 1 : 0;
    class_students[label].insert(rec.student_id);
    corpus.entries.push_back({rec.student_id, rec.essay_id, rec.text, label});
  }
  for (int c = 0; c < 2; ++c) {
    if (class_students[c].empty())
      throw DataError(std::string("build_gender_corpus: degenerate corpus, class '") +
                      (c == 0 ? corpus.task.class0_name : corpus.task.class1_name) +
                      "' has no students (scope " + to_string(scope) + ")");
  }
  return corpus;
}

LabeledCorpus build_income_corpus(const std::vector<RawRecord>& records, Scope scope,
                                  long long income_floor) {
  const auto income_of = resolve_student_attribute<long long>(
      records, scope, [](const RawRecord& r) { return r.income; });

  // one income per kept student
  std::vector<long long> incomes;
  std::unordered_map<std::string, long long> kept;
  std::unordered_set<std::string> counted;
  for (const RawRecord& rec : records) {
    if (!in_scope(rec.year, scope)) continue;
    const auto it = income_of.find(rec.student_id);
    if (it == income_of.end() || it->second < income_floor) continue;
    if (counted.insert(rec.student_id).second) {
      incomes.push_back(it->second);
      kept.emplace(rec.student_id, it->second);
    }
  }
  if (incomes.empty())
    throw DataError("build_income_corpus: no students with usable income (scope " +
                    std::string(to_string(scope)) + ")");

  // lower median: element at index floor((n - 1) / 2) of the sorted incomes
  std::vector<long long> sorted = incomes;
  std::sort(sorted.begin(), sorted.end());
  const long long median = sorted[(sorted.size() - 1) / 2];

  LabeledCorpus corpus;
  corpus.task = AuditTask::income();
  corpus.scope = scope;
  corpus.median_used = median;
  std::array<std::unordered_set<std::string>, 2> class_students;
  for (const RawRecord& rec : records) {
    if (!in_scope(rec.year, scope)) continue;
    const auto it = kept.find(rec.student_id);
    if (it == kept.end()) continue;
    const int label = it->second > median ? 1 : 0;  // at the median -> below
    class_students[label].insert(rec.student_id);
    corpus.entries.push_back({rec.student_id, rec.essay_id, rec.text, label});
  }
  for (int c = 0; c < 2; ++c) {
    if (class_students[c].empty())
      throw DataError(std::string("build_income_corpus: degenerate corpus, class '") +
                      (c == 0 ? corpus.task.class0_name : corpus.task.class1_name) +
                      "' has no students (scope " + to_string(scope) + ")");
  }
  return corpus;
}

CorpusStats corpus_stats(const LabeledCorpus& corpus) {
  CorpusStats stats;
  std::unordered_set<std::string> students;
  std::array<std::unordered_set<std::string>, 2> class_students;
  for (const CorpusEntry& e : corpus.entries) {
    students.insert(e.student_id);
    class_students[e.label].insert(e.student_id);
    ++stats.class_essays[e.label];
    ++stats.essays;
  }
  stats.students = students.size();
  stats.class_students = {class_students[0].size(), class_students[1].size()};
  return stats;
}

ScopeSummary scope_summary(const std::vector<RawRecord>& records, Scope scope) {
  const auto gender_of = resolve_student_attribute<Gender>(
      records, scope, [](const RawRecord& r) { return r.gender; });
  ScopeSummary s;
  std::unordered_set<std::string> students;
  for (const RawRecord& rec : records) {
    if (!in_scope(rec.year, scope)) continue;
    ++s.essays;
    if (!students.insert(rec.student_id).second) continue;
    const auto it = gender_of.find(rec.student_id);
    if (it != gender_of.end()) {
      if (it->second == Gender::Female) {
        ++s.female;
      } else {
        ++s.male;
      }
    }
  }
  s.students = students.size();
  return s;
}

std::string records_to_jsonl(const std::vector<RawRecord>& records) {
  std::string out;
  for (const RawRecord& rec : records) {
    json row;
    row["student_id"] = rec.student_id;
    row["essay_id"] = rec.essay_id;
    row["year"] = to_string(rec.year);
    row["text"] = rec.text;
    if (rec.gender) {
      row["gender"] = to_string(*rec.gender);
    } else {
      row["gender"] = nullptr;
    }
    if (rec.income) {
      row["income"] = *rec.income;
    } else {
      row["income"] = nullptr;
    }
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace audit
