#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "audit/types.hpp"

namespace audit {

enum class InputFormat { Jsonl, Csv };

// Dataset-defined year strings -> cohort tags.
using YearMap = std::map<std::string, Year>;

inline YearMap default_year_map() { return {{"Y1", Year::Y1}, {"Y2", Year::Y2}}; }

struct IngestError {
  std::size_t line = 0;       // 1-based line where the row started
  std::string essay_id;       // empty when the row had none
  std::string field;          // offending field, when known
  std::string message;
};

struct IngestResult {
  std::vector<RawRecord> records;
  std::vector<IngestError> errors;  // row-level problems; those rows are skipped
};

// Reads essay records from a stream. JSONL rows carry keys student_id, essay_id,
// year, text, gender ("Male"/"Female"/null) and income (integer dollars/null).
// CSV uses the same columns with a header row; empty cells mean absent.
// Malformed rows become IngestErrors; a duplicate essay_id is fatal (DataError).
IngestResult ingest(std::istream& in, InputFormat format, const YearMap& year_map);

// Keeps records whose text has at least min_chars Unicode scalar values.
std::vector<RawRecord> filter_min_length(const std::vector<RawRecord>& records,
                                         std::size_t min_chars = 100);

// Essays of students with a reported gender inside the scope; label 0 = Male,
// label 1 = Female. Gender is a student-level attribute: the first reported
// value among the student's in-scope records wins. A class with no students
// is fatal (DataError).
LabeledCorpus build_gender_corpus(const std::vector<RawRecord>& records, Scope scope);

// Essays of students with reported income >= income_floor inside the scope.
// The median is the lower median over the kept students' incomes (one value
// per student); income <= median -> label 0 (BelowMedian), income > median ->
// label 1 (AboveMedian). An empty class is fatal (DataError).
LabeledCorpus build_income_corpus(const std::vector<RawRecord>& records, Scope scope,
                                  long long income_floor = 10000);

CorpusStats corpus_stats(const LabeledCorpus& corpus);

// Composition of the raw records inside a scope, before any task filtering:
// total students, students by reported gender, essays.
struct ScopeSummary {
  std::size_t students = 0;
  std::size_t female = 0;
  std::size_t male = 0;
  std::size_t essays = 0;
};

ScopeSummary scope_summary(const std::vector<RawRecord>& records, Scope scope);

// One JSONL line per record, keys sorted, null for absent gender/income.
std::string records_to_jsonl(const std::vector<RawRecord>& records);

}  // namespace audit
