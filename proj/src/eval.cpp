#include "audit/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "audit/rng.hpp"

namespace audit {

namespace {

std::uint64_t cell_tag(TaskKind task, Scope scope) {
  return (static_cast<std::uint64_t>(task) << 8) | static_cast<std::uint64_t>(scope);
}

double mean_of(const std::vector<double>& values) {
  double total = 0.0;
  for (const double v : values) total += v;
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ZeroRule: return "zerorule";
    case ModelKind::NB: return "nb";
    case ModelKind::LR: return "lr";
    default: return "mlp";
  }
}

FoldPlan make_folds(const LabeledCorpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("make_folds: k must be >= 2");
  // unique students per class, in first-appearance order
  std::array<std::vector<std::string>, 2> students;
  std::unordered_map<std::string, int> seen;
  for (const CorpusEntry& e : corpus.entries) {
    const auto [it, inserted] = seen.emplace(e.student_id, e.label);
    if (inserted) {
      students[e.label].push_back(e.student_id);
    } else if (it->second != e.label) {
      throw DataError("make_folds: student '" + e.student_id + "' carries two labels");
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (students[c].size() < static_cast<std::size_t>(k))
      throw DataError(std::string("make_folds: class '") +
                      (c == 0 ? corpus.task.class0_name : corpus.task.class1_name) + "' has " +
                      std::to_string(students[c].size()) + " students, needs >= " +
                      std::to_string(k));
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  Rng rng(derive_seed(seed, {0xf01d5u, cell_tag(corpus.task.kind, corpus.scope)}));
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(students[c]);
    for (std::size_t i = 0; i < students[c].size(); ++i) {
      plan.assignment.emplace(students[c][i], static_cast<int>(i % k));
    }
  }
  return plan;
}

Metrics compute_metrics(std::span<const int> predictions, std::span<const int> gold,
                        int positive_class) {
  if (predictions.size() != gold.size() || predictions.empty())
    throw std::invalid_argument("compute_metrics: bad inputs");
  if (positive_class != 0 && positive_class != 1)
    throw std::invalid_argument("compute_metrics: positive_class must be 0 or 1");
  Metrics m;
  m.positive_class = positive_class;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if ((predictions[i] != 0 && predictions[i] != 1) || (gold[i] != 0 && gold[i] != 1))
      throw std::invalid_argument("compute_metrics: labels must be 0 or 1");
    ++m.confusion[gold[i]][predictions[i]];
  }
  const int neg = 1 - positive_class;
  const double tp = static_cast<double>(m.confusion[positive_class][positive_class]);
  const double fp = static_cast<double>(m.confusion[neg][positive_class]);
  const double fn = static_cast<double>(m.confusion[positive_class][neg]);
  const double tn = static_cast<double>(m.confusion[neg][neg]);
  m.degenerate = (tp + fp == 0.0) && (tp + fn == 0.0);
  m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = (tp + tn) / static_cast<double>(predictions.size());
  return m;
}

TaskResult run_task(const LabeledCorpus& corpus, ModelKind model, const FoldPlan& plan,
                    const TrainSettings& settings) {
  TaskResult result;
  result.model = model;
  result.task = corpus.task;
  result.scope = corpus.scope;

  // fold membership per entry
  std::vector<int> fold_of(corpus.entries.size());
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const auto it = plan.assignment.find(corpus.entries[i].student_id);
    if (it == plan.assignment.end())
      throw std::invalid_argument("run_task: fold plan does not cover student '" +
                                  corpus.entries[i].student_id + "'");
    fold_of[i] = it->second;
  }

  // tokenized once, reused across folds
  std::vector<TokenSeq> tokens(corpus.entries.size());
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    tokens[i] = tokenize(corpus.entries[i].text);
  }

  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
      (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
    }
    if (train_idx.empty() || test_idx.empty())
      throw DataError("run_task: empty fold " + std::to_string(fold));

    std::vector<int> train_labels, test_labels;
    train_labels.reserve(train_idx.size());
    for (const std::size_t i : train_idx) train_labels.push_back(corpus.entries[i].label);
    bool has0 = false, has1 = false;
    for (const int y : train_labels) (y == 0 ? has0 : has1) = true;
    if (!has0 || !has1)
      throw DataError("run_task: training folds for fold " + std::to_string(fold) +
                      " contain a single class");

    std::vector<int> preds;
    preds.reserve(test_idx.size());
    std::vector<double> scores;
    scores.reserve(test_idx.size());
    std::uint64_t fold_oov = 0;

    if (model == ModelKind::ZeroRule) {
      const ZeroRuleModel zr = zero_rule_train(train_labels);
      for (std::size_t t = 0; t < test_idx.size(); ++t) {
        preds.push_back(zr.majority_label);
        scores.push_back(zr.majority_fraction);
      }
    } else {
      // vocabulary from training folds only; held-out tokens unseen in
      // training are dropped (and tallied) rather than leaked
      std::vector<TokenSeq> train_tokens;
      train_tokens.reserve(train_idx.size());
      for (const std::size_t i : train_idx) train_tokens.push_back(tokens[i]);
      const Vocabulary vocab = build_vocabulary(train_tokens, settings.min_doc_freq);

      std::vector<CountVector> train_vecs;
      train_vecs.reserve(train_idx.size());
      for (const std::size_t i : train_idx) train_vecs.push_back(vectorize(tokens[i], vocab));
      std::vector<CountVector> test_vecs;
      test_vecs.reserve(test_idx.size());
      for (const std::size_t i : test_idx)
        test_vecs.push_back(vectorize(tokens[i], vocab, &fold_oov));

      const std::uint64_t model_seed =
          derive_seed(settings.seed, {cell_tag(corpus.task.kind, corpus.scope),
                                      static_cast<std::uint64_t>(model),
                                      static_cast<std::uint64_t>(fold)});
      if (model == ModelKind::NB) {
        const NBModel nb = nb_train(train_vecs, train_labels, vocab.size(), settings.nb_alpha);
        for (const CountVector& v : test_vecs) {
          const NBPrediction p = nb_predict(nb, v);
          preds.push_back(p.label);
          scores.push_back(p.log_scores[1] - p.log_scores[0]);
        }
      } else if (model == ModelKind::LR) {
        const LRModel lr =
            lr_train(train_vecs, train_labels, vocab.size(), settings.lr_policy, model_seed);
        for (const CountVector& v : test_vecs) {
          const LRPrediction p = lr_predict(lr, v);
          preds.push_back(p.label);
          scores.push_back(p.probability);
        }
      } else {
        const MLPModel net =
            mlp_train(train_vecs, train_labels, vocab.size(), settings.mlp_policy, model_seed);
        for (const CountVector& v : test_vecs) {
          const MlpPrediction p = mlp_predict(net, v);
          preds.push_back(p.label);
          scores.push_back(p.probability);
        }
      }
    }

    test_labels.reserve(test_idx.size());
    for (const std::size_t i : test_idx) test_labels.push_back(corpus.entries[i].label);
    const Metrics m1 = compute_metrics(preds, test_labels, 1);
    const Metrics m0 = compute_metrics(preds, test_labels, 0);
    result.per_fold.push_back(m1);
    result.per_fold_f1_class0.push_back(m0.f1);
    result.per_fold_accuracy.push_back(m1.accuracy);
    result.oov_test_tokens += fold_oov;
    if (settings.record_predictions) {
      for (std::size_t t = 0; t < test_idx.size(); ++t) {
        result.predictions.push_back({corpus.entries[test_idx[t]].essay_id, fold,
                                      test_labels[t], preds[t], scores[t]});
      }
    }
  }

  std::vector<double> f1s, accs;
  for (const Metrics& m : result.per_fold) {
    f1s.push_back(m.f1);
    accs.push_back(m.accuracy);
  }
  result.mean_f1 = mean_of(f1s);
  result.mean_accuracy = mean_of(accs);
  result.mean_f1_class0 = mean_of(result.per_fold_f1_class0);
  result.mean_f1_macro = 0.5 * (result.mean_f1 + result.mean_f1_class0);
  return result;
}

GridResult run_grid(const std::vector<RawRecord>& records, const GridSettings& settings) {
  bool has_y1 = false, has_y2 = false;
  for (const RawRecord& r : records) (r.year == Year::Y1 ? has_y1 : has_y2) = true;

  // ZeroRule always runs; keep configured order for the rest
  std::vector<ModelKind> models = {ModelKind::ZeroRule};
  for (const ModelKind m : settings.models) {
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
  }
  std::vector<TaskKind> tasks;
  for (const TaskKind t : settings.tasks) {
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
  }

  static constexpr std::array<Scope, 3> kScopes = {Scope::Y1, Scope::Y2, Scope::Combined};
  GridResult grid;
  struct Job {
    const LabeledCorpus* corpus;
    const FoldPlan* plan;
    ModelKind model;
    std::size_t slot;
  };
  std::vector<LabeledCorpus> corpora;
  std::vector<FoldPlan> plans;
  corpora.reserve(tasks.size() * kScopes.size());  // exact upper bound: jobs keep pointers
  plans.reserve(tasks.size() * kScopes.size());
  std::vector<Job> jobs;

  for (const TaskKind task : tasks) {
    for (const Scope scope : kScopes) {
      GridCell cell;
      cell.task = task == TaskKind::Gender ? AuditTask::gender() : AuditTask::income();
      cell.scope = scope;
      std::string skip;
      if (scope == Scope::Y1 && !has_y1) skip = "no Y1 records";
      if (scope == Scope::Y2 && !has_y2) skip = "no Y2 records";
      if (scope == Scope::Combined && !(has_y1 && has_y2))
        skip = "combined scope requires both cohorts";
      if (!skip.empty()) {
        cell.skip_reason = skip;
        grid.cells.push_back(std::move(cell));
        for (const ModelKind m : models) {
          TaskResult r;
          r.model = m;
          r.task = cell.task;
          r.scope = scope;
          r.skipped = true;
          r.skip_reason = skip;
          grid.results.push_back(std::move(r));
        }
        continue;
      }

      corpora.push_back(task == TaskKind::Gender
                            ? build_gender_corpus(records, scope)
                            : build_income_corpus(records, scope, settings.income_floor));
      const LabeledCorpus& corpus = corpora.back();
      plans.push_back(make_folds(corpus, settings.k, settings.train.seed));

      cell.built = true;
      cell.stats = corpus_stats(corpus);
      cell.median_used = corpus.median_used;
      // whole-corpus naive Bayes fit for the indicative-word orderings
      {
        std::vector<TokenSeq> docs;
        docs.reserve(corpus.entries.size());
        for (const CorpusEntry& e : corpus.entries) docs.push_back(tokenize(e.text));
        const Vocabulary vocab = build_vocabulary(docs, settings.train.min_doc_freq);
        std::vector<CountVector> vecs;
        vecs.reserve(docs.size());
        for (const TokenSeq& d : docs) vecs.push_back(vectorize(d, vocab));
        std::vector<int> labels;
        labels.reserve(corpus.entries.size());
        for (const CorpusEntry& e : corpus.entries) labels.push_back(e.label);
        const NBModel nb = nb_train(vecs, labels, vocab.size(), settings.train.nb_alpha);
        cell.fr_class0 = frequency_ratios(nb, vocab, 0);
        cell.fr_class1 = frequency_ratios(nb, vocab, 1);
      }
      grid.cells.push_back(std::move(cell));

      for (const ModelKind m : models) {
        TaskResult placeholder;
        placeholder.model = m;
        placeholder.task = corpus.task;
        placeholder.scope = scope;
        jobs.push_back({&corpus, &plans.back(), m, grid.results.size()});
        grid.results.push_back(std::move(placeholder));
      }
    }
  }

  unsigned thread_count = settings.threads > 0
                              ? static_cast<unsigned>(settings.threads)
                              : std::max(1u, std::thread::hardware_concurrency());
  thread_count = std::min<unsigned>(thread_count, jobs.empty() ? 1 : jobs.size());

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        grid.results[jobs[j].slot] =
            run_task(*jobs[j].corpus, jobs[j].model, *jobs[j].plan, settings.train);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return grid;
}

}  // namespace audit
