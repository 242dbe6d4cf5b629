#include "audit/types.hpp"

namespace audit {

const char* to_string(Year y) { return y == Year::Y1 ? "Y1" : "Y2"; }

const char* to_string(Scope s) {
  switch (s) {
    case Scope::Y1: return "Y1";
    case Scope::Y2: return "Y2";
    default: return "Combined";
  }
}

const char* to_string(Gender g) { return g == Gender::Male ? "Male" : "Female"; }

const char* to_string(TaskKind t) { return t == TaskKind::Gender ? "gender" : "income"; }

}  // namespace audit
