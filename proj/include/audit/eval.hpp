#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "audit/corpus.hpp"
#include "audit/linear.hpp"
#include "audit/mlp.hpp"
#include "audit/nb.hpp"
#include "audit/types.hpp"

namespace audit {

enum class ModelKind { ZeroRule, NB, LR, MLP };

const char* to_string(ModelKind kind);

// Student-level stratified k-fold assignment: within each class the unique
// students are shuffled (seeded) and dealt round-robin, so per-fold per-class
// student counts differ by at most one and no student spans folds.
struct FoldPlan {
  int k = 5;
  std::unordered_map<std::string, int> assignment;  // student_id -> fold
  std::uint64_t seed = 0;
};

// Fatal (DataError) when any class has fewer than k students.
FoldPlan make_folds(const LabeledCorpus& corpus, int k = 5, std::uint64_t seed = 0);

struct Metrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  std::array<std::array<std::uint64_t, 2>, 2> confusion{};  // [gold][predicted]
  int positive_class = 1;
  bool degenerate = false;  // no positive gold and no positive predictions
};

Metrics compute_metrics(std::span<const int> predictions, std::span<const int> gold,
                        int positive_class);

struct TrainSettings {
  double nb_alpha = 1.0;
  std::size_t min_doc_freq = 1;
  EarlyStopPolicy lr_policy{};
  MlpPolicy mlp_policy{};
  std::uint64_t seed = 0;
  bool record_predictions = false;
};

struct EssayPrediction {
  std::string essay_id;
  int fold = 0;
  int gold = 0;
  int predicted = 0;
  double score = 0.0;  // model-specific: probability or log-score margin
};

struct TaskResult {
  ModelKind model = ModelKind::ZeroRule;
  AuditTask task;
  Scope scope = Scope::Combined;
  bool skipped = false;
  std::string skip_reason;
  std::vector<Metrics> per_fold;              // positive class = 1
  std::vector<double> per_fold_f1_class0;
  std::vector<double> per_fold_accuracy;
  double mean_f1 = 0.0;
  double mean_accuracy = 0.0;
  double mean_f1_class0 = 0.0;
  double mean_f1_macro = 0.0;
  std::uint64_t oov_test_tokens = 0;
  std::vector<EssayPrediction> predictions;   // only when record_predictions
};

// Cross-validates one model on one corpus. Every fold rebuilds the vocabulary
// from its training folds only, trains on them and scores the held-out fold.
TaskResult run_task(const LabeledCorpus& corpus, ModelKind model, const FoldPlan& plan,
                    const TrainSettings& settings);

struct GridSettings {
  TrainSettings train;
  int k = 5;
  long long income_floor = 10000;
  std::vector<TaskKind> tasks = {TaskKind::Gender, TaskKind::Income};
  std::vector<ModelKind> models = {ModelKind::NB, ModelKind::LR, ModelKind::MLP};
  std::size_t top_n_fr = 10;
  int threads = 0;  // 0 = hardware concurrency
};

struct GridCell {
  AuditTask task;
  Scope scope = Scope::Combined;
  bool built = false;
  std::string skip_reason;
  CorpusStats stats;
  std::optional<long long> median_used;
  // frequency-ratio orderings from a whole-corpus naive Bayes fit
  std::vector<FrequencyRatioEntry> fr_class0;
  std::vector<FrequencyRatioEntry> fr_class1;
};

struct GridResult {
  std::vector<GridCell> cells;       // task-major, scope order Y1, Y2, Combined
  std::vector<TaskResult> results;   // cell-major, then model order
};

// Runs every configured model (ZeroRule always included) over
// {tasks} x {Y1, Y2, Combined}. A scope with no records is skipped, and the
// Combined scope requires both cohorts; skipped cells yield TaskResults with
// skipped = true rather than failures. Records must already be length-filtered.
GridResult run_grid(const std::vector<RawRecord>& records, const GridSettings& settings);

}  // namespace audit
