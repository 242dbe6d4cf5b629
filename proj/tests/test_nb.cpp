#include <cmath>

#include "audit/nb.hpp"
#include "audit/rng.hpp"
#include "audit/types.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace audit;
using testsupport::cv;

namespace {

// one document per class: class 0 tokens {a:2, b:1}, class 1 tokens {a:1, b:2}
struct HandFixture {
  std::vector<CountVector> vectors = {cv({{0, 2}, {1, 1}}), cv({{0, 1}, {1, 2}})};
  std::vector<int> labels = {0, 1};
  NBModel model = nb_train(vectors, labels, 2, 1.0);
};

}  // namespace

TEST_CASE("nb_train: hand-applied smoothing formula") {
  HandFixture fx;
  // P(a|0) = (2+1)/(3+2) = 3/5, P(b|0) = 2/5; class 1 mirrored
  CHECK(std::exp(fx.model.log_likelihood[0][0]) == doctest::Approx(3.0 / 5).epsilon(1e-12));
  CHECK(std::exp(fx.model.log_likelihood[0][1]) == doctest::Approx(2.0 / 5).epsilon(1e-12));
  CHECK(std::exp(fx.model.log_likelihood[1][0]) == doctest::Approx(2.0 / 5).epsilon(1e-12));
  CHECK(std::exp(fx.model.log_likelihood[1][1]) == doctest::Approx(3.0 / 5).epsilon(1e-12));
  CHECK(std::exp(fx.model.log_prior[0]) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(fx.model.log_prior[1]) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("nb_train: likelihoods normalize and priors sum to one") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = testsupport::random_corpus(rng);
    NBModel model = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 1.0);
    for (int c = 0; c < 2; ++c) {
      double sum = 0.0;
      for (double ll : model.log_likelihood[c]) {
        CHECK(std::isfinite(ll));  // alpha > 0 keeps every likelihood positive
        sum += std::exp(ll);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(std::exp(model.log_prior[0]) + std::exp(model.log_prior[1]) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("nb_train: identical class corpora give identical likelihoods") {
  std::vector<CountVector> vectors = {cv({{0, 3}, {2, 1}}), cv({{0, 3}, {2, 1}})};
  std::vector<int> labels = {0, 1};
  NBModel model = nb_train(vectors, labels, 3, 1.0);
  for (std::uint32_t w = 0; w < 3; ++w)
    CHECK(model.log_likelihood[0][w] == model.log_likelihood[1][w]);
}

TEST_CASE("nb_train: words absent from a class get the smoothing floor") {
  std::vector<CountVector> vectors = {cv({{0, 4}}), cv({{1, 6}})};
  std::vector<int> labels = {0, 1};
  NBModel model = nb_train(vectors, labels, 2, 1.0);
  // class 0 never saw token 1: P = alpha / (tokens_0 + alpha*V) = 1/6
  CHECK(std::exp(model.log_likelihood[0][1]) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(std::exp(model.log_likelihood[1][0]) == doctest::Approx(1.0 / 8).epsilon(1e-12));
}

TEST_CASE("nb_train: invalid inputs") {
  std::vector<CountVector> vectors = {cv({{0, 1}}), cv({{1, 1}})};
  std::vector<int> one_class = {0, 0};
  CHECK_THROWS_AS((void)nb_train(vectors, one_class, 2, 1.0), DataError);
  std::vector<int> labels = {0, 1};
  CHECK_THROWS_AS((void)nb_train(vectors, labels, 2, 0.0), ConfigError);
  CHECK_THROWS_AS((void)nb_train(vectors, labels, 2, -1.0), ConfigError);
  CHECK_THROWS_AS((void)nb_train({}, {}, 2, 1.0), DataError);
}

TEST_CASE("nb_predict: prior-only decision on an empty document") {
  // 7 docs class 0, 3 docs class 1 -> priors 0.7 / 0.3
  std::vector<CountVector> vectors(10, cv({{0, 1}}));
  std::vector<int> labels = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
  NBModel model = nb_train(vectors, labels, 1, 1.0);
  NBPrediction pred = nb_predict(model, cv({}));
  CHECK(pred.label == 0);
  CHECK(pred.log_scores[0] == doctest::Approx(std::log(0.7)).epsilon(1e-12));
  CHECK(pred.log_scores[1] == doctest::Approx(std::log(0.3)).epsilon(1e-12));
}

TEST_CASE("nb_predict: hand arithmetic on the two-token fixture") {
  HandFixture fx;
  NBPrediction pred = nb_predict(fx.model, cv({{0, 2}}));
  const double expected0 = std::log(0.5) + 2 * std::log(3.0 / 5);
  const double expected1 = std::log(0.5) + 2 * std::log(2.0 / 5);
  CHECK(pred.log_scores[0] == doctest::Approx(expected0).epsilon(1e-12));
  CHECK(pred.log_scores[1] == doctest::Approx(expected1).epsilon(1e-12));
  CHECK(pred.log_scores[0] > pred.log_scores[1]);
  CHECK(pred.label == 0);
}

TEST_CASE("nb_predict: exact ties go to class 0") {
  HandFixture fx;  // fully symmetric corpus
  // a symmetric document scores identically under both classes
  NBPrediction pred = nb_predict(fx.model, cv({{0, 1}, {1, 1}}));
  CHECK(pred.log_scores[0] == pred.log_scores[1]);
  CHECK(pred.label == 0);
}

TEST_CASE("nb matches the brute-force probability-space oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto corpus = testsupport::random_corpus(rng);
    NBModel model = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 1.0);
    testsupport::BruteNB brute =
        testsupport::brute_nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 1.0);
    for (int c = 0; c < 2; ++c) {
      CHECK(std::exp(model.log_prior[c]) == doctest::Approx(brute.prior[c]).epsilon(1e-9));
      for (std::uint32_t w = 0; w < corpus.vocab_size; ++w)
        CHECK(std::exp(model.log_likelihood[c][w]) ==
              doctest::Approx(brute.likelihood[c][w]).epsilon(1e-9));
    }
    for (const CountVector& vec : corpus.vectors)
      CHECK(nb_predict(model, vec).label == testsupport::brute_nb_predict(brute, vec));
  }
}

TEST_CASE("nb_train: doubling documents and alpha together changes nothing") {
  Rng rng(11);
  auto corpus = testsupport::random_corpus(rng);
  std::vector<CountVector> doubled = corpus.vectors;
  doubled.insert(doubled.end(), corpus.vectors.begin(), corpus.vectors.end());
  std::vector<int> doubled_labels = corpus.labels;
  doubled_labels.insert(doubled_labels.end(), corpus.labels.begin(), corpus.labels.end());

  NBModel base = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 1.0);
  NBModel scaled = nb_train(doubled, doubled_labels, corpus.vocab_size, 2.0);
  for (int c = 0; c < 2; ++c) {
    CHECK(scaled.log_prior[c] == doctest::Approx(base.log_prior[c]).epsilon(1e-12));
    for (std::uint32_t w = 0; w < corpus.vocab_size; ++w)
      CHECK(scaled.log_likelihood[c][w] ==
            doctest::Approx(base.log_likelihood[c][w]).epsilon(1e-12));
  }
}

TEST_CASE("nb_train: duplication leaves likelihoods unchanged as alpha -> 0") {
  Rng rng(13);
  auto corpus = testsupport::random_corpus(rng);
  std::vector<CountVector> doubled = corpus.vectors;
  doubled.insert(doubled.end(), corpus.vectors.begin(), corpus.vectors.end());
  std::vector<int> doubled_labels = corpus.labels;
  doubled_labels.insert(doubled_labels.end(), corpus.labels.begin(), corpus.labels.end());

  const double alpha = 1e-9;
  NBModel base = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, alpha);
  NBModel dup = nb_train(doubled, doubled_labels, corpus.vocab_size, alpha);
  for (int c = 0; c < 2; ++c) {
    CHECK(dup.log_prior[c] == doctest::Approx(base.log_prior[c]).epsilon(1e-12));
    for (std::uint32_t w = 0; w < corpus.vocab_size; ++w) {
      // with smoothing nearly off, the count ratios dominate
      CHECK(dup.log_likelihood[c][w] == doctest::Approx(base.log_likelihood[c][w]).epsilon(1e-6));
    }
  }
}

TEST_CASE("frequency_ratios: hand ratios 1.5 and 2/3") {
  HandFixture fx;
  Vocabulary vocab;
  vocab.tokens = {"a", "b"};
  vocab.index = {{"a", 0}, {"b", 1}};
  auto ratios = frequency_ratios(fx.model, vocab, 0);
  REQUIRE(ratios.size() == 2);
  CHECK(ratios[0].token == "a");
  CHECK(ratios[0].fr == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(ratios[1].token == "b");
  CHECK(ratios[1].fr == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("frequency_ratios: symmetric corpus gives all ones, ties sort by token") {
  std::vector<CountVector> vectors = {cv({{0, 1}, {1, 1}, {2, 1}}), cv({{0, 1}, {1, 1}, {2, 1}})};
  std::vector<int> labels = {0, 1};
  NBModel model = nb_train(vectors, labels, 3, 1.0);
  Vocabulary vocab;
  vocab.tokens = {"cc", "aa", "bb"};  // deliberately unsorted names for the tie check
  std::sort(vocab.tokens.begin(), vocab.tokens.end());
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
    vocab.index[vocab.tokens[i]] = static_cast<std::uint32_t>(i);
  auto ratios = frequency_ratios(model, vocab, 0);
  REQUIRE(ratios.size() == 3);
  for (const auto& e : ratios) CHECK(e.fr == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ratios[0].token == "aa");
  CHECK(ratios[1].token == "bb");
  CHECK(ratios[2].token == "cc");
}

TEST_CASE("frequency_ratios: reciprocity, positivity and descending order") {
  Rng rng(19);
  auto corpus = testsupport::random_corpus(rng);
  NBModel model = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 1.0);
  Vocabulary vocab;
  for (std::uint32_t w = 0; w < corpus.vocab_size; ++w)
    vocab.tokens.push_back("w" + std::string(1, static_cast<char>('a' + w)));
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
    vocab.index[vocab.tokens[i]] = static_cast<std::uint32_t>(i);

  auto fr0 = frequency_ratios(model, vocab, 0);
  auto fr1 = frequency_ratios(model, vocab, 1);
  REQUIRE(fr0.size() == corpus.vocab_size);
  std::unordered_map<std::string, double> by_token;
  for (const auto& e : fr1) by_token[e.token] = e.fr;
  for (const auto& e : fr0) {
    CHECK(e.fr > 0.0);
    CHECK(std::isfinite(e.fr));
    CHECK(e.fr * by_token[e.token] == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < fr0.size(); ++i) {
    CHECK(fr0[i - 1].fr >= fr0[i].fr);
    if (fr0[i - 1].fr == fr0[i].fr) CHECK(fr0[i - 1].token < fr0[i].token);
  }
}

TEST_CASE("nb prediction monotone in a class-0-leaning token") {
  HandFixture fx;  // fr(a) = 1.5 > 1 with numerator class 0
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> dense(2, 0);
    const std::uint64_t len = rng.below(8);
    for (std::uint64_t t = 0; t < len; ++t) ++dense[rng.below(2)];
    CountVector base;
    for (std::uint32_t w = 0; w < 2; ++w)
      if (dense[w] > 0) base.pairs.emplace_back(w, dense[w]);
    if (nb_predict(fx.model, base).label != 0) continue;
    // add occurrences of token a (index 0)
    for (std::uint32_t extra = 1; extra <= 3; ++extra) {
      std::vector<std::uint32_t> more = dense;
      more[0] += extra;
      CountVector bumped;
      for (std::uint32_t w = 0; w < 2; ++w)
        if (more[w] > 0) bumped.pairs.emplace_back(w, more[w]);
      CHECK(nb_predict(fx.model, bumped).label == 0);
    }
  }
}

TEST_CASE("nb serialization round-trips predictions") {
  Rng rng(29);
  auto corpus = testsupport::random_corpus(rng);
  NBModel model = nb_train(corpus.vectors, corpus.labels, corpus.vocab_size, 0.5);
  nlohmann::json doc = nb_to_json(model, 0xabcdef);
  CHECK(doc.at("format_version").get<int>() == 1);
  CHECK(doc.at("kind").get<std::string>() == "naive_bayes");
  CHECK(doc.at("vocab_hash").get<std::uint64_t>() == 0xabcdef);
  NBModel loaded = nb_from_json(doc);
  CHECK(loaded.alpha == model.alpha);
  for (const CountVector& vec : corpus.vectors) {
    NBPrediction a = nb_predict(model, vec);
    NBPrediction b = nb_predict(loaded, vec);
    CHECK(a.label == b.label);
    CHECK(a.log_scores[0] == b.log_scores[0]);
    CHECK(a.log_scores[1] == b.log_scores[1]);
  }
}

TEST_CASE("nb_predict rejects out-of-range indices") {
  HandFixture fx;
  CHECK_THROWS((void)nb_predict(fx.model, cv({{5, 1}})));
}
