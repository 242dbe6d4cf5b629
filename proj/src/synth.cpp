#include "audit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "audit/rng.hpp"
#include "audit/tokenizer.hpp"

namespace audit {

namespace {

void validate_spec(const SynthSpec& spec) {
  if (spec.n_students < 1) throw ConfigError("synth spec: n_students must be >= 1");
  if (spec.essays_per_student < 1)
    throw ConfigError("synth spec: essays_per_student must be >= 1");
  if (!(spec.doc_length > 0.0 && spec.doc_length <= 600.0))
    throw ConfigError("synth spec: doc_length must be in (0, 600]");
  if (spec.background_vocab + 2 * spec.signal_words_per_class == 0)
    throw ConfigError("synth spec: vocabulary must not be empty");
  if (!(spec.signal_ratio >= 1.0)) throw ConfigError("synth spec: signal_ratio must be >= 1");
  if (!(spec.class_balance > 0.0 && spec.class_balance < 1.0))
    throw ConfigError("synth spec: class_balance must be in (0, 1)");
  if (spec.income_class0.sigma < 0.0 || spec.income_class1.sigma < 0.0)
    throw ConfigError("synth spec: income sigma must be >= 0");
}

std::string word_name(const SynthSpec& spec, std::size_t idx) {
  char buf[32];
  if (idx < spec.background_vocab) {
    std::snprintf(buf, sizeof(buf), "bg%zu", idx);
  } else if (idx < spec.background_vocab + spec.signal_words_per_class) {
    std::snprintf(buf, sizeof(buf), "s0x%zu", idx - spec.background_vocab);
  } else {
    std::snprintf(buf, sizeof(buf), "s1x%zu",
                  idx - spec.background_vocab - spec.signal_words_per_class);
  }
  return buf;
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;  // guard against rounding drift
  return cdf;
}

std::size_t draw_word(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

}  // namespace

SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("synth spec: document must be a JSON object");
  static const char* kKeys[] = {"n_students",    "essays_per_student", "doc_length",
                                "background_vocab", "signal_words_per_class", "signal_ratio",
                                "class_balance", "income_class0",      "income_class1",
                                "seed"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&key](const char* k) { return key == k; }) == std::end(kKeys))
      throw ConfigError("synth spec: unknown key '" + key + "'");
  }
  SynthSpec spec;
  try {
    spec.n_students = doc.value("n_students", spec.n_students);
    spec.essays_per_student = doc.value("essays_per_student", spec.essays_per_student);
    spec.doc_length = doc.value("doc_length", spec.doc_length);
    spec.background_vocab = doc.value("background_vocab", spec.background_vocab);
    spec.signal_words_per_class =
        doc.value("signal_words_per_class", spec.signal_words_per_class);
    spec.signal_ratio = doc.value("signal_ratio", spec.signal_ratio);
    spec.class_balance = doc.value("class_balance", spec.class_balance);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("income_class0")) {
      spec.income_class0.mu = doc["income_class0"].at("mu").get<double>();
      spec.income_class0.sigma = doc["income_class0"].at("sigma").get<double>();
    }
    if (doc.contains("income_class1")) {
      spec.income_class1.mu = doc["income_class1"].at("mu").get<double>();
      spec.income_class1.sigma = doc["income_class1"].at("sigma").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
  nlohmann::json doc;
  doc["n_students"] = spec.n_students;
  doc["essays_per_student"] = spec.essays_per_student;
  doc["doc_length"] = spec.doc_length;
  doc["background_vocab"] = spec.background_vocab;
  doc["signal_words_per_class"] = spec.signal_words_per_class;
  doc["signal_ratio"] = spec.signal_ratio;
  doc["class_balance"] = spec.class_balance;
  doc["income_class0"] = {{"mu", spec.income_class0.mu}, {"sigma", spec.income_class0.sigma}};
  doc["income_class1"] = {{"mu", spec.income_class1.mu}, {"sigma", spec.income_class1.sigma}};
  doc["seed"] = spec.seed;
  return doc;
}

std::vector<double> class_distribution(const SynthSpec& spec, int cls) {
  validate_spec(spec);
  if (cls != 0 && cls != 1) throw std::invalid_argument("class_distribution: cls must be 0 or 1");
  const std::size_t b = spec.background_vocab;
  const std::size_t s = spec.signal_words_per_class;
  const std::size_t w = b + 2 * s;
  const double u = 1.0 / static_cast<double>(w);
  const double own = 2.0 * u * spec.signal_ratio / (spec.signal_ratio + 1.0);
  const double other = 2.0 * u / (spec.signal_ratio + 1.0);
  std::vector<double> probs(w, u);
  for (std::size_t j = 0; j < s; ++j) {
    probs[b + j] = cls == 0 ? own : other;          // class-0 signal words
    probs[b + s + j] = cls == 1 ? own : other;      // class-1 signal words
  }
  return probs;
}

std::vector<std::string> synth_vocabulary(const SynthSpec& spec) {
  const std::size_t w = spec.background_vocab + 2 * spec.signal_words_per_class;
  std::vector<std::string> words;
  words.reserve(w);
  for (std::size_t i = 0; i < w; ++i) words.push_back(word_name(spec, i));
  return words;
}

std::vector<RawRecord> generate(const SynthSpec& spec) {
  validate_spec(spec);
  const std::vector<std::string> words = synth_vocabulary(spec);
  const std::array<std::vector<double>, 2> cdf = {cumulative(class_distribution(spec, 0)),
                                                  cumulative(class_distribution(spec, 1))};

  Rng assign_rng(derive_seed(spec.seed, {0xa551u}));
  Rng text_rng(derive_seed(spec.seed, {0x7e57u}));
  Rng income_rng(derive_seed(spec.seed, {0x1ec0u}));

  // cohorts alternate by student index; class labels are allocated exactly per
  // cohort and shuffled, so both per-cohort and combined balances are planted
  const std::size_t n = spec.n_students;
  std::array<std::vector<int>, 2> cohort_labels;
  for (int cohort = 0; cohort < 2; ++cohort) {
    const std::size_t size = cohort == 0 ? (n + 1) / 2 : n / 2;
    const std::size_t ones = static_cast<std::size_t>(
        std::llround(spec.class_balance * static_cast<double>(size)));
    std::vector<int>& labels = cohort_labels[cohort];
    labels.assign(size, 0);
    std::fill(labels.begin(), labels.begin() + std::min(ones, size), 1);
    assign_rng.shuffle(labels);
  }

  std::vector<RawRecord> records;
  records.reserve(n * spec.essays_per_student);
  std::array<std::size_t, 2> cohort_pos{0, 0};
  char idbuf[40];
  for (std::size_t i = 0; i < n; ++i) {
    const int cohort = static_cast<int>(i % 2);
    const int cls = cohort_labels[cohort][cohort_pos[cohort]++];
    const LogNormalParams& inc = cls == 0 ? spec.income_class0 : spec.income_class1;
    const long long income =
        std::llround(std::exp(inc.mu + inc.sigma * income_rng.normal()));

    std::snprintf(idbuf, sizeof(idbuf), "st%06zu", i);
    const std::string student_id = idbuf;
    for (std::size_t e = 0; e < spec.essays_per_student; ++e) {
      RawRecord rec;
      rec.student_id = student_id;
      std::snprintf(idbuf, sizeof(idbuf), "st%06zu-e%zu", i, e);
      rec.essay_id = idbuf;
      rec.year = cohort == 0 ? Year::Y1 : Year::Y2;
      rec.gender = cls == 0 ? Gender::Male : Gender::Female;
      rec.income = income;

      const std::uint64_t len = text_rng.poisson(spec.doc_length);
      std::string text;
      text.reserve(static_cast<std::size_t>(len) * 8);
      for (std::uint64_t t = 0; t < len; ++t) {
        if (!text.empty()) text.push_back(' ');
        text += words[draw_word(cdf[cls], text_rng)];
      }
      if (text.size() < 100) text.resize(100, ' ');  // all-ASCII: bytes == characters
      rec.text = std::move(text);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

BayesEstimate bayes_optimal_accuracy(const SynthSpec& spec, std::size_t n_trials) {
  validate_spec(spec);
  if (n_trials < 10000)
    throw ConfigError("bayes_optimal_accuracy: n_trials must be >= 10000");
  const std::array<std::vector<double>, 2> probs = {class_distribution(spec, 0),
                                                    class_distribution(spec, 1)};
  const std::array<std::vector<double>, 2> cdf = {cumulative(probs[0]), cumulative(probs[1])};
  std::vector<double> log_ratio(probs[0].size());
  for (std::size_t w = 0; w < probs[0].size(); ++w) {
    log_ratio[w] = std::log(probs[1][w]) - std::log(probs[0][w]);
  }
  const double log_prior_ratio =
      std::log(spec.class_balance) - std::log(1.0 - spec.class_balance);

  Rng rng(derive_seed(spec.seed, {0xbae5u}));
  std::size_t correct = 0;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    const int cls = rng.uniform() < spec.class_balance ? 1 : 0;
    const std::uint64_t len = rng.poisson(spec.doc_length);
    double delta = log_prior_ratio;
    for (std::uint64_t t = 0; t < len; ++t) {
      delta += log_ratio[draw_word(cdf[cls], rng)];
    }
    const int label = delta > 0.0 ? 1 : 0;  // tie -> class 0
    correct += label == cls;
  }
  BayesEstimate est;
  est.accuracy = static_cast<double>(correct) / static_cast<double>(n_trials);
  est.std_error = std::sqrt(est.accuracy * (1.0 - est.accuracy) /
                            static_cast<double>(n_trials));
  return est;
}

}  // namespace audit
