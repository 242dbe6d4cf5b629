#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "audit/corpus.hpp"
#include "audit/nb.hpp"
#include "audit/synth.hpp"
#include "audit/tokenizer.hpp"
#include "audit/vectorizer.hpp"
#include "doctest.h"

using namespace audit;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_students = 40;
  spec.essays_per_student = 2;
  spec.doc_length = 60.0;
  spec.background_vocab = 30;
  spec.signal_words_per_class = 3;
  spec.signal_ratio = 4.0;
  spec.seed = 9;
  return spec;
}

}  // namespace

TEST_CASE("class_distribution: zero signal words makes both classes identical") {
  SynthSpec spec = small_spec();
  spec.signal_words_per_class = 0;
  const std::vector<double> d0 = class_distribution(spec, 0);
  const std::vector<double> d1 = class_distribution(spec, 1);
  CHECK(d0 == d1);
  REQUIRE(d0.size() == spec.background_vocab);
  double total = 0.0;
  for (const double p : d0) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("class_distribution: planted probabilities follow the closed form") {
  SynthSpec spec = small_spec();  // W = 30 + 2*3 = 36
  const double u = 1.0 / 36.0;
  const double r = spec.signal_ratio;
  const std::vector<double> d0 = class_distribution(spec, 0);
  const std::vector<double> d1 = class_distribution(spec, 1);
  REQUIRE(d0.size() == 36);
  for (std::size_t w = 0; w < 30; ++w) {
    CHECK(d0[w] == doctest::Approx(u).epsilon(1e-12));
    CHECK(d1[w] == doctest::Approx(u).epsilon(1e-12));
  }
  for (std::size_t w = 30; w < 33; ++w) {  // class-0 signal words
    CHECK(d0[w] == doctest::Approx(2 * u * r / (r + 1)).epsilon(1e-12));
    CHECK(d1[w] == doctest::Approx(2 * u / (r + 1)).epsilon(1e-12));
    CHECK(d0[w] / d1[w] == doctest::Approx(r).epsilon(1e-12));
  }
  for (std::size_t w = 33; w < 36; ++w) {  // class-1 signal words
    CHECK(d1[w] / d0[w] == doctest::Approx(r).epsilon(1e-12));
  }
  double total0 = 0.0, total1 = 0.0;
  for (std::size_t w = 0; w < 36; ++w) {
    total0 += d0[w];
    total1 += d1[w];
  }
  CHECK(total0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate: shape, padding, cohorts and exact class allocation") {
  SynthSpec spec = small_spec();
  std::vector<RawRecord> records = generate(spec);
  CHECK(records.size() == spec.n_students * spec.essays_per_student);

  std::set<std::string> essay_ids;
  std::map<std::string, std::pair<Gender, long long>> students;
  std::map<std::string, Year> cohorts;
  for (const RawRecord& r : records) {
    CHECK(essay_ids.insert(r.essay_id).second);
    CHECK(r.text.size() >= 100);
    REQUIRE(r.gender.has_value());
    REQUIRE(r.income.has_value());
    CHECK(*r.income >= 0);
    students.emplace(r.student_id, std::make_pair(*r.gender, *r.income));
    cohorts.emplace(r.student_id, r.year);
    // every record of a student repeats the same demographics
    CHECK(students.at(r.student_id).first == *r.gender);
    CHECK(students.at(r.student_id).second == *r.income);
  }
  CHECK(students.size() == spec.n_students);

  std::size_t female = 0, y1 = 0;
  for (const auto& [id, info] : students)
    if (info.first == Gender::Female) ++female;
  for (const auto& [id, year] : cohorts)
    if (year == Year::Y1) ++y1;
  CHECK(female == 20);  // exact allocation at balance 0.5
  CHECK(y1 == 20);      // cohorts alternate by student index

  // planted income separation: class 1 (Female) students earn more on average
  double male_total = 0.0, female_total = 0.0;
  for (const auto& [id, info] : students) {
    (info.first == Gender::Female ? female_total : male_total) += double(info.second);
  }
  CHECK(female_total / 20.0 > 2.0 * (male_total / 20.0));
}

TEST_CASE("generate: exact allocation holds for uneven balances") {
  SynthSpec spec = small_spec();
  spec.n_students = 100;
  spec.class_balance = 0.58;
  std::vector<RawRecord> records = generate(spec);
  std::set<std::string> female_students, all_students;
  for (const RawRecord& r : records) {
    all_students.insert(r.student_id);
    if (r.gender == Gender::Female) female_students.insert(r.student_id);
  }
  CHECK(all_students.size() == 100);
  CHECK(female_students.size() == 58);
}

TEST_CASE("generate: the same seed reproduces the corpus byte for byte") {
  SynthSpec spec = small_spec();
  const std::string a = records_to_jsonl(generate(spec));
  const std::string b = records_to_jsonl(generate(spec));
  CHECK(a == b);
  spec.seed += 1;
  const std::string c = records_to_jsonl(generate(spec));
  CHECK(a != c);
}

TEST_CASE("generate: empirical signal-word usage matches the planted ratio within 5%") {
  SynthSpec spec;
  spec.n_students = 1500;
  spec.essays_per_student = 2;
  spec.doc_length = 120.0;
  spec.background_vocab = 50;
  spec.signal_words_per_class = 4;
  spec.signal_ratio = 4.0;
  spec.seed = 31;
  std::vector<RawRecord> records = generate(spec);
  const std::vector<std::string> vocab_names = synth_vocabulary(spec);
  REQUIRE(vocab_names.size() == 58);

  std::map<std::string, std::array<double, 2>> usage;  // token -> per-class counts
  std::array<double, 2> totals{0.0, 0.0};
  for (const RawRecord& r : records) {
    const int cls = r.gender == Gender::Female ? 1 : 0;
    for (const std::string& tok : tokenize(r.text)) {
      usage[tok][cls] += 1.0;
      totals[cls] += 1.0;
    }
  }
  for (std::size_t w = 50; w < 54; ++w) {  // class-0 signal words
    const auto& u = usage.at(vocab_names[w]);
    const double ratio = (u[0] / totals[0]) / (u[1] / totals[1]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }
  for (std::size_t w = 54; w < 58; ++w) {  // class-1 signal words
    const auto& u = usage.at(vocab_names[w]);
    const double ratio = (u[1] / totals[1]) / (u[0] / totals[0]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("naive Bayes recovers planted frequency ratios within 10%") {
  SynthSpec spec;
  spec.n_students = 5000;
  spec.essays_per_student = 2;
  spec.doc_length = 100.0;
  spec.background_vocab = 40;
  spec.signal_words_per_class = 3;
  spec.signal_ratio = 4.0;
  spec.seed = 77;
  std::vector<RawRecord> records = generate(spec);

  std::vector<TokenSeq> docs;
  std::vector<int> labels;
  for (const RawRecord& r : records) {
    docs.push_back(tokenize(r.text));
    labels.push_back(r.gender == Gender::Female ? 1 : 0);
  }
  const Vocabulary vocab = build_vocabulary(docs, 1);
  std::vector<CountVector> vecs;
  for (const TokenSeq& d : docs) vecs.push_back(vectorize(d, vocab));
  const NBModel nb = nb_train(vecs, labels, vocab.size(), 1.0);

  const std::vector<std::string> names = synth_vocabulary(spec);
  std::set<std::string> class1_signals(names.begin() + 43, names.end());
  std::vector<FrequencyRatioEntry> fr1 = frequency_ratios(nb, vocab, 1);
  // the three class-1 signal words must top the class-1 ordering, near ratio 4
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(class1_signals.count(fr1[i].token) == 1);
    CHECK(fr1[i].fr == doctest::Approx(4.0).epsilon(0.10));
  }
}

TEST_CASE("bayes_optimal_accuracy: no signal collapses to the prior") {
  SynthSpec spec = small_spec();
  spec.signal_words_per_class = 0;
  spec.class_balance = 0.3;
  BayesEstimate est = bayes_optimal_accuracy(spec, 20000);
  CHECK(est.std_error > 0.0);
  CHECK(est.std_error < 0.01);
  CHECK(std::abs(est.accuracy - 0.7) <= 2.0 * est.std_error + 1e-9);
}

TEST_CASE("bayes_optimal_accuracy: overwhelming signal is almost perfectly separable") {
  SynthSpec spec = small_spec();
  spec.signal_ratio = 1e6;
  spec.doc_length = 200.0;
  BayesEstimate est = bayes_optimal_accuracy(spec, 20000);
  CHECK(est.accuracy > 0.999);
}

TEST_CASE("bayes_optimal_accuracy: estimates are seeded and reproducible") {
  SynthSpec spec = small_spec();
  BayesEstimate a = bayes_optimal_accuracy(spec, 15000);
  BayesEstimate b = bayes_optimal_accuracy(spec, 15000);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.std_error == b.std_error);
  CHECK_THROWS_AS((void)bayes_optimal_accuracy(spec, 9999), ConfigError);
}

TEST_CASE("synth spec json: round-trip and validation") {
  SynthSpec spec = small_spec();
  spec.class_balance = 0.42;
  spec.income_class0 = {9.5, 0.2};
  nlohmann::json doc = synth_spec_to_json(spec);
  SynthSpec back = synth_spec_from_json(doc);
  CHECK(back.n_students == spec.n_students);
  CHECK(back.essays_per_student == spec.essays_per_student);
  CHECK(back.doc_length == spec.doc_length);
  CHECK(back.background_vocab == spec.background_vocab);
  CHECK(back.signal_words_per_class == spec.signal_words_per_class);
  CHECK(back.signal_ratio == spec.signal_ratio);
  CHECK(back.class_balance == spec.class_balance);
  CHECK(back.income_class0.mu == spec.income_class0.mu);
  CHECK(back.income_class0.sigma == spec.income_class0.sigma);
  CHECK(back.seed == spec.seed);
  CHECK(records_to_jsonl(generate(back)) == records_to_jsonl(generate(spec)));

  nlohmann::json unknown = synth_spec_to_json(spec);
  unknown["background_words"] = 10;
  CHECK_THROWS_AS((void)synth_spec_from_json(unknown), ConfigError);

  nlohmann::json partial = {{"n_students", 12}};  // other fields keep defaults
  SynthSpec sparse = synth_spec_from_json(partial);
  CHECK(sparse.n_students == 12);
  CHECK(sparse.essays_per_student == 2);
  CHECK(sparse.signal_ratio == 4.0);
}

TEST_CASE("synth spec json: invalid values are configuration errors") {
  auto with = [](const char* key, nlohmann::json value) {
    nlohmann::json doc;
    doc[key] = std::move(value);
    return doc;
  };
  CHECK_THROWS_AS((void)synth_spec_from_json(with("n_students", 0)), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("essays_per_student", 0)), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("doc_length", -1.0)), ConfigError);
  nlohmann::json empty_vocab = {{"background_vocab", 0}, {"signal_words_per_class", 0}};
  CHECK_THROWS_AS((void)synth_spec_from_json(empty_vocab), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("signal_ratio", 0.5)), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("class_balance", 0.0)), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("class_balance", 1.0)), ConfigError);
  CHECK_THROWS_AS((void)synth_spec_from_json(with("income_class0", nlohmann::json{{"mu", 9.0}, {"sigma", -0.1}})),
                  ConfigError);
}

TEST_CASE("generated corpora ingest cleanly through the jsonl reader") {
  SynthSpec spec = small_spec();
  std::vector<RawRecord> records = generate(spec);
  std::istringstream in(records_to_jsonl(records));
  IngestResult result = ingest(in, InputFormat::Jsonl, default_year_map());
  CHECK(result.errors.empty());
  REQUIRE(result.records.size() == records.size());
  CHECK(records_to_jsonl(result.records) == records_to_jsonl(records));
  // synthetic text always survives the default length filter
  CHECK(filter_min_length(result.records, 100).size() == records.size());
}
