#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "audit/config.hpp"
#include "audit/eval.hpp"
#include "json.hpp"

namespace audit {

inline constexpr const char* kToolVersion = "0.1.0";

// Canonical serialization: object keys sorted, no whitespace, floating-point
// numbers printed with 17 significant digits so re-parsing reproduces every
// value exactly. Byte-identical for equal documents.
std::string canonical_json_dump(const nlohmann::json& doc);

struct FrTableRow {
  std::size_t rank = 0;  // 1-based
  std::string word;
  double fr = 0.0;  // raw (unrounded) ratio
};

// Top rows of a descending-sorted frequency-ratio list. When fewer than top_n
// entries exist, all of them are returned (callers note the shortfall).
std::vector<FrTableRow> render_fr_table(std::span<const FrequencyRatioEntry> entries,
                                        std::size_t top_n = 10);

// Display rounding for ratio tables: half-up to one decimal place.
double round_fr_display(double fr);
std::string format_fr_display(double fr);

// Machine-readable audit report: config echo, per-cell corpus statistics,
// the model x task x scope metric grid, and raw frequency-ratio tables.
nlohmann::json build_report_json(const GridResult& grid, const RunConfig& config);

// Human-readable mirror of the same content: composition tables per task,
// mean accuracy / f1 grids, and rank/word/ratio tables per class.
std::string render_report_markdown(const GridResult& grid, const RunConfig& config);

// One JSON line per held-out essay prediction, in grid order.
std::string predictions_to_jsonl(const GridResult& grid);

// Writes via a temporary file in the same directory plus an atomic rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace audit
