#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace audit {

// Malformed or degenerate input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or generator spec. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Year { Y1, Y2 };
enum class Scope { Y1, Y2, Combined };
enum class Gender { Male, Female };
enum class TaskKind { Gender, Income };

const char* to_string(Year y);
const char* to_string(Scope s);
const char* to_string(Gender g);
const char* to_string(TaskKind t);

inline bool in_scope(Year y, Scope s) {
  return s == Scope::Combined || (s == Scope::Y1 && y == Year::Y1) ||
         (s == Scope::Y2 && y == Year::Y2);
}

// A binary labeling task. Class 0 / class 1 carry task-specific names:
// gender -> Male / Female, income -> BelowMedian / AboveMedian.
struct AuditTask {
  TaskKind kind = TaskKind::Gender;
  std::string class0_name;
  std::string class1_name;

  static AuditTask gender() { return {TaskKind::Gender, "Male", "Female"}; }
  static AuditTask income() { return {TaskKind::Income, "BelowMedian", "AboveMedian"}; }
};

struct RawRecord {
  std::string student_id;
  std::string essay_id;
  Year year = Year::Y1;
  std::string text;
  std::optional<long long> income;  // whole dollars, >= 0
  std::optional<Gender> gender;
};

struct CorpusEntry {
  std::string student_id;
  std::string essay_id;
  std::string text;
  int label = 0;  // 0 = task.class0, 1 = task.class1
};

struct LabeledCorpus {
  AuditTask task;
  Scope scope = Scope::Combined;
  std::vector<CorpusEntry> entries;
  std::optional<long long> median_used;  // income task only
};

struct CorpusStats {
  std::size_t students = 0;
  std::size_t essays = 0;
  std::array<std::size_t, 2> class_students{0, 0};
  std::array<std::size_t, 2> class_essays{0, 0};
};

}  // namespace audit
