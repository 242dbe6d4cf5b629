#include "audit/nb.hpp"

#include <algorithm>
#include <cmath>

#include "audit/types.hpp"

namespace audit {

NBModel nb_train(std::span<const CountVector> vectors, std::span<const int> labels,
                 std::uint32_t vocab_size, double alpha) {
  if (vectors.size() != labels.size())
    throw std::invalid_argument("nb_train: vectors/labels size mismatch");
  if (vectors.empty()) throw DataError("nb_train: empty training set");
  if (!(alpha > 0.0)) throw ConfigError("nb_train: alpha must be > 0");
  if (vocab_size == 0) throw DataError("nb_train: empty vocabulary");

  std::array<std::uint64_t, 2> docs{0, 0};
  std::array<std::vector<std::uint64_t>, 2> counts;
  counts[0].assign(vocab_size, 0);
  counts[1].assign(vocab_size, 0);
  NBModel model;
  model.alpha = alpha;
  model.vocab_size = vocab_size;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw std::invalid_argument("nb_train: labels must be 0 or 1");
    ++docs[y];
    for (const auto& [idx, n] : vectors[i].pairs) {
      if (idx >= vocab_size) throw std::out_of_range("nb_train: token index out of range");
      counts[y][idx] += n;
      model.class_token_totals[y] += n;
    }
  }
  if (docs[0] == 0 || docs[1] == 0) throw DataError("nb_train: single-class training set");

  const double log_total_docs = std::log(static_cast<double>(docs[0] + docs[1]));
  for (int c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(static_cast<double>(docs[c])) - log_total_docs;
    model.log_likelihood[c].resize(vocab_size);
    const double denom =
        std::log(static_cast<double>(model.class_token_totals[c]) + alpha * vocab_size);
    for (std::uint32_t w = 0; w < vocab_size; ++w) {
      model.log_likelihood[c][w] = std::log(static_cast<double>(counts[c][w]) + alpha) - denom;
    }
  }
  return model;
}

NBPrediction nb_predict(const NBModel& model, const CountVector& vec) {
  NBPrediction pred;
  pred.log_scores = model.log_prior;
  for (const auto& [idx, n] : vec.pairs) {
    if (idx >= model.vocab_size) throw std::out_of_range("nb_predict: token index out of range");
    pred.log_scores[0] += n * model.log_likelihood[0][idx];
    pred.log_scores[1] += n * model.log_likelihood[1][idx];
  }
  pred.label = pred.log_scores[1] > pred.log_scores[0] ? 1 : 0;  // tie -> class 0
  return pred;
}

std::vector<FrequencyRatioEntry> frequency_ratios(const NBModel& model, const Vocabulary& vocab,
                                                  int numerator_class) {
  if (numerator_class != 0 && numerator_class != 1)
    throw std::invalid_argument("frequency_ratios: numerator_class must be 0 or 1");
  if (vocab.size() != model.vocab_size)
    throw std::invalid_argument("frequency_ratios: vocabulary size mismatch");
  const int num = numerator_class;
  const int den = 1 - numerator_class;
  std::vector<FrequencyRatioEntry> entries;
  entries.reserve(model.vocab_size);
  for (std::uint32_t w = 0; w < model.vocab_size; ++w) {
    entries.push_back(
        {vocab.tokens[w], std::exp(model.log_likelihood[num][w] - model.log_likelihood[den][w])});
  }
  std::sort(entries.begin(), entries.end(),
            [](const FrequencyRatioEntry& a, const FrequencyRatioEntry& b) {
              if (a.fr != b.fr) return a.fr > b.fr;
              return a.token < b.token;
            });
  return entries;
}

nlohmann::json nb_to_json(const NBModel& model, std::uint64_t vocab_hash) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "naive_bayes";
  doc["alpha"] = model.alpha;
  doc["vocab_size"] = model.vocab_size;
  doc["vocab_hash"] = vocab_hash;
  doc["log_prior"] = model.log_prior;
  doc["log_likelihood"] = model.log_likelihood;
  doc["class_token_totals"] = model.class_token_totals;
  return doc;
}

NBModel nb_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format_version", 0) != 1 ||
      doc.value("kind", "") != "naive_bayes")
    throw DataError("nb_from_json: unsupported model document");
  NBModel model;
  model.alpha = doc.at("alpha").get<double>();
  model.vocab_size = doc.at("vocab_size").get<std::uint32_t>();
  doc.at("log_prior").get_to(model.log_prior);
  doc.at("log_likelihood").get_to(model.log_likelihood);
  doc.at("class_token_totals").get_to(model.class_token_totals);
  if (model.log_likelihood[0].size() != model.vocab_size ||
      model.log_likelihood[1].size() != model.vocab_size)
    throw DataError("nb_from_json: likelihood table size mismatch");
  return model;
}

}  // namespace audit
