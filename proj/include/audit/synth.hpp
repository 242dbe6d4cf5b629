#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "audit/types.hpp"
#include "json.hpp"

namespace audit {

struct LogNormalParams {
  double mu = 0.0;     // mean of log income
  double sigma = 0.0;  // stddev of log income
};

// Planted-signal corpus spec. The vocabulary holds background_vocab shared
// words plus signal_words_per_class words per class; with W total words and
// u = 1/W, background words carry probability u in both classes while a class-c
// signal word carries 2u*r/(r+1) in class c and 2u/(r+1) in the other class,
// so its class-conditional probability ratio is exactly signal_ratio. Essay
// lengths are Poisson(doc_length); incomes are log-normal per class.
struct SynthSpec {
  std::size_t n_students = 1000;
  std::size_t essays_per_student = 2;
  double doc_length = 300.0;
  std::size_t background_vocab = 2000;
  std::size_t signal_words_per_class = 5;
  double signal_ratio = 4.0;      // >= 1
  double class_balance = 0.5;     // fraction of students in class 1, in (0, 1)
  LogNormalParams income_class0{9.903487552536127, 0.15};   // around $20k
  LogNormalParams income_class1{11.289781913656018, 0.15};  // around $80k
  std::uint64_t seed = 0;
};

SynthSpec synth_spec_from_json(const nlohmann::json& doc);  // ConfigError on bad values
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Token probabilities for one class over the full vocabulary, in vocabulary
// order (background words first, then class-0 signal words, then class-1).
std::vector<double> class_distribution(const SynthSpec& spec, int cls);

// Vocabulary word names in the same order class_distribution uses.
std::vector<std::string> synth_vocabulary(const SynthSpec& spec);

// Deterministic corpus: class 0 students report Male / lower incomes, class 1
// Female / higher incomes; cohorts alternate by student and class counts are
// allocated exactly (round(class_balance * n) per cohort) rather than sampled,
// so planted balances are exact. Essay text is the space-joined token sample,
// padded with spaces to at least 100 characters.
std::vector<RawRecord> generate(const SynthSpec& spec);

struct BayesEstimate {
  double accuracy = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo accuracy of the true-likelihood-ratio classifier (priors from
// class_balance, ties to class 0) on documents drawn from the generative
// process itself: an upper reference for any trained model.
BayesEstimate bayes_optimal_accuracy(const SynthSpec& spec, std::size_t n_trials);

}  // namespace audit
