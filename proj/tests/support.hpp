#pragma once

// Shared helpers for the unit and acceptance suites: an independent non-log
// naive Bayes implementation (literal counting, plain products) used as an
// oracle, plus small fixture builders.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "audit/rng.hpp"
#include "audit/vectorizer.hpp"

namespace testsupport {

// Literal-formula naive Bayes in probability space (no logs). Only safe for
// small fixtures; that is the point — it shares no code path with the library.
struct BruteNB {
  std::array<double, 2> prior{0.0, 0.0};
  std::array<std::vector<double>, 2> likelihood;  // plain probabilities
};

inline BruteNB brute_nb_train(std::span<const audit::CountVector> vectors,
                              std::span<const int> labels, std::uint32_t vocab_size,
                              double alpha) {
  BruteNB model;
  std::array<double, 2> docs{0.0, 0.0};
  std::array<double, 2> tokens{0.0, 0.0};
  std::array<std::vector<double>, 2> counts{std::vector<double>(vocab_size, 0.0),
                                            std::vector<double>(vocab_size, 0.0)};
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int c = labels[i];
    docs[c] += 1.0;
    for (const auto& [idx, n] : vectors[i].pairs) {
      counts[c][idx] += static_cast<double>(n);
      tokens[c] += static_cast<double>(n);
    }
  }
  for (int c = 0; c < 2; ++c) {
    model.prior[c] = docs[c] / (docs[0] + docs[1]);
    model.likelihood[c].resize(vocab_size);
    for (std::uint32_t w = 0; w < vocab_size; ++w) {
      model.likelihood[c][w] =
          (counts[c][w] + alpha) / (tokens[c] + alpha * static_cast<double>(vocab_size));
    }
  }
  return model;
}

// score(c) = P(c) * prod_w P(w|c)^n, evaluated literally; ties -> class 0.
inline int brute_nb_predict(const BruteNB& model, const audit::CountVector& vec) {
  std::array<double, 2> score{model.prior[0], model.prior[1]};
  for (int c = 0; c < 2; ++c) {
    for (const auto& [idx, n] : vec.pairs) {
      for (std::uint32_t k = 0; k < n; ++k) score[c] *= model.likelihood[c][idx];
    }
  }
  return score[1] > score[0] ? 1 : 0;
}

struct RandomCorpus {
  std::vector<audit::CountVector> vectors;
  std::vector<int> labels;
  std::uint32_t vocab_size = 0;
};

// Small random multinomial corpus with both classes guaranteed present.
inline RandomCorpus random_corpus(audit::Rng& rng, std::size_t max_docs = 20,
                                  std::uint32_t max_vocab = 12) {
  RandomCorpus corpus;
  corpus.vocab_size = 2 + static_cast<std::uint32_t>(rng.below(max_vocab - 1));
  const std::size_t n_docs = 2 + rng.below(max_docs - 1);
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::vector<std::uint32_t> dense(corpus.vocab_size, 0);
    const std::uint64_t len = rng.below(31);
    for (std::uint64_t t = 0; t < len; ++t) ++dense[rng.below(corpus.vocab_size)];
    audit::CountVector vec;
    for (std::uint32_t w = 0; w < corpus.vocab_size; ++w) {
      if (dense[w] > 0) {
        vec.pairs.emplace_back(w, dense[w]);
        vec.total_tokens += dense[w];
      }
    }
    corpus.vectors.push_back(std::move(vec));
    corpus.labels.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2)));
  }
  return corpus;
}

// Sparse vector literal: {(index, count), ...} pairs must be sorted.
inline audit::CountVector cv(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> pairs) {
  audit::CountVector vec;
  for (const auto& [idx, n] : pairs) {
    vec.pairs.emplace_back(idx, n);
    vec.total_tokens += n;
  }
  return vec;
}

}  // namespace testsupport
