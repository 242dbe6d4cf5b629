#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "audit/tokenizer.hpp"
#include "audit/vectorizer.hpp"
#include "json.hpp"

namespace audit {

// Multinomial naive Bayes over token counts, all arithmetic in log space.
struct NBModel {
  std::array<double, 2> log_prior{0.0, 0.0};
  std::array<std::vector<double>, 2> log_likelihood;  // per class, size vocab_size
  double alpha = 1.0;
  std::array<std::uint64_t, 2> class_token_totals{0, 0};
  std::uint32_t vocab_size = 0;
};

// Priors are document fractions; token likelihoods use additive smoothing:
// P(w|c) = (count(w, c) + alpha) / (tokens_c + alpha * V). A single-class
// training set is fatal (DataError); alpha must be > 0 (ConfigError).
NBModel nb_train(std::span<const CountVector> vectors, std::span<const int> labels,
                 std::uint32_t vocab_size, double alpha = 1.0);

struct NBPrediction {
  int label = 0;
  std::array<double, 2> log_scores{0.0, 0.0};  // log prior + sum count * log likelihood
};

// Ties in the log scores break toward class 0.
NBPrediction nb_predict(const NBModel& model, const CountVector& vec);

struct FrequencyRatioEntry {
  std::string token;
  double fr = 0.0;  // P(token | numerator class) / P(token | other class)
};

// Smoothed likelihood ratios for every vocabulary token, sorted by descending
// ratio; ties order lexicographically by token.
std::vector<FrequencyRatioEntry> frequency_ratios(const NBModel& model, const Vocabulary& vocab,
                                                  int numerator_class);

nlohmann::json nb_to_json(const NBModel& model, std::uint64_t vocab_hash);
NBModel nb_from_json(const nlohmann::json& doc);

}  // namespace audit
