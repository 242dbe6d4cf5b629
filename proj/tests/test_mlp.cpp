#include <cmath>

#include "audit/mlp.hpp"
#include "audit/rng.hpp"
#include "audit/types.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace audit;
using testsupport::cv;

namespace {

MLPModel tiny_model(std::uint32_t vocab, std::uint32_t hidden, std::uint64_t seed,
                    double dropout, double l2) {
  MLPModel model = mlp_init(vocab, hidden, seed);
  model.dropout_rate = dropout;
  model.l2_lambda = l2;
  return model;
}

// 8 distinct, separable documents
struct EightDocs {
  std::vector<CountVector> vectors = {
      cv({{0, 1}}),         cv({{0, 2}}),         cv({{0, 1}, {2, 1}}), cv({{0, 3}, {2, 1}}),
      cv({{1, 1}}),         cv({{1, 2}}),         cv({{1, 1}, {2, 1}}), cv({{1, 3}, {2, 2}}),
  };
  std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
};

double l2_norm_sq(const MLPModel& m) {
  double sum = 0.0;
  for (const double w : m.w1) sum += w * w;
  for (const double w : m.w2) sum += w * w;
  return sum;
}

}  // namespace

TEST_CASE("mlp_init: deterministic, bounded, zero biases") {
  MLPModel a = mlp_init(7, 4, 123);
  MLPModel b = mlp_init(7, 4, 123);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);

  const double limit1 = std::sqrt(6.0 / (7 + 4));
  const double limit2 = std::sqrt(6.0 / (4 + 1));
  for (const double w : a.w1) {
    CHECK(w <= limit1);
    CHECK(w >= -limit1);
  }
  for (const double w : a.w2) {
    CHECK(w <= limit2);
    CHECK(w >= -limit2);
  }
  for (const double v : a.b1) CHECK(v == 0.0);
  CHECK(a.b2 == 0.0);

  MLPModel one = mlp_init(1, 1, 5);
  CHECK(one.w1.size() == 1);
  CHECK(one.b1.size() == 1);
  CHECK(one.w2.size() == 1);
  CHECK(one.b1[0] == 0.0);
  CHECK(one.b2 == 0.0);

  MLPModel c = mlp_init(7, 4, 124);
  CHECK(a.w1 != c.w1);  // the seed matters
}

TEST_CASE("mlp_forward: all-zero parameters are exactly uncertain") {
  MLPModel model;
  model.input_size = 3;
  model.hidden_size = 2;
  model.w1.assign(6, 0.0);
  model.b1.assign(2, 0.0);
  model.w2.assign(2, 0.0);
  model.b2 = 0.0;
  MlpActivations acts = mlp_forward(model, cv({{0, 2}, {2, 1}}));
  CHECK(acts.prob == 0.5);
  CHECK(acts.z == 0.0);
}

TEST_CASE("mlp_forward: dropout 0 makes training and eval identical") {
  MLPModel model = tiny_model(4, 3, 11, 0.0, 0.0);
  Rng rng(99);
  const CountVector vec = cv({{0, 1}, {3, 2}});
  MlpActivations train_mode = mlp_forward(model, vec, &rng);
  MlpActivations eval_mode = mlp_forward(model, vec);
  CHECK(train_mode.prob == eval_mode.prob);
  CHECK(train_mode.hidden == eval_mode.hidden);
}

TEST_CASE("mlp_forward: eval mode is a pure function") {
  MLPModel model = tiny_model(4, 3, 17, 0.5, 0.0);
  const CountVector vec = cv({{1, 2}});
  MlpActivations first = mlp_forward(model, vec);
  for (int i = 0; i < 5; ++i) {
    MlpActivations again = mlp_forward(model, vec);
    CHECK(again.prob == first.prob);
    CHECK(again.hidden == first.hidden);
  }
}

TEST_CASE("inverted dropout: Monte-Carlo mean of hidden equals eval hidden within 1%") {
  MLPModel model = tiny_model(4, 6, 19, 0.5, 0.0);
  const CountVector vec = cv({{0, 1}, {1, 3}, {3, 1}});
  MlpActivations eval_mode = mlp_forward(model, vec);

  Rng rng(555);
  std::vector<double> mean(model.hidden_size, 0.0);
  const int n_masks = 100000;
  for (int i = 0; i < n_masks; ++i) {
    MlpActivations t = mlp_forward(model, vec, &rng);
    for (std::uint32_t h = 0; h < model.hidden_size; ++h) mean[h] += t.hidden[h];
  }
  for (std::uint32_t h = 0; h < model.hidden_size; ++h) {
    mean[h] /= n_masks;
    if (std::abs(eval_mode.hidden[h]) > 1e-12) {
      CHECK(std::abs(mean[h] - eval_mode.hidden[h]) / std::abs(eval_mode.hidden[h]) < 0.01);
    } else {
      CHECK(std::abs(mean[h]) < 1e-12);  // dropped zeros stay zero
    }
  }
}

TEST_CASE("mlp gradients match central finite differences") {
  Rng rng(41);
  const double step = 1e-5;
  for (int trial = 0; trial < 4; ++trial) {
    // V=5, H=3, 4 documents
    std::vector<CountVector> vectors;
    std::vector<int> labels;
    for (int d = 0; d < 4; ++d) {
      std::vector<std::uint32_t> dense(5, 0);
      const std::uint64_t len = 1 + rng.below(5);
      for (std::uint64_t t = 0; t < len; ++t) ++dense[rng.below(5)];
      CountVector vec;
      for (std::uint32_t w = 0; w < 5; ++w)
        if (dense[w] > 0) vec.pairs.emplace_back(w, dense[w]);
      vectors.push_back(vec);
      labels.push_back(d % 2);
    }
    MLPModel model = tiny_model(5, 3, 1000 + trial, 0.0, trial % 2 == 0 ? 0.0 : 1e-3);

    MlpGradients grads = mlp_gradient(model, vectors, labels);
    auto check_param = [&](double& slot, double analytic) {
      const double keep = slot;
      slot = keep + step;
      const double hi = mlp_loss(model, vectors, labels);
      slot = keep - step;
      const double lo = mlp_loss(model, vectors, labels);
      slot = keep;
      const double fd = (hi - lo) / (2 * step);
      const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
      CHECK(std::abs(analytic - fd) / denom < 1e-4);
    };
    for (std::size_t i = 0; i < model.w1.size(); ++i) check_param(model.w1[i], grads.w1[i]);
    for (std::size_t i = 0; i < model.b1.size(); ++i) check_param(model.b1[i], grads.b1[i]);
    for (std::size_t i = 0; i < model.w2.size(); ++i) check_param(model.w2[i], grads.w2[i]);
    check_param(model.b2, grads.b2);
  }
}

TEST_CASE("mlp per-document gradient with a frozen dropout mask matches FD") {
  MLPModel model = tiny_model(5, 3, 77, 0.5, 0.0);
  const CountVector vec = cv({{0, 1}, {2, 2}, {4, 1}});
  const int label = 1;
  Rng rng(7);
  MlpActivations acts = mlp_forward(model, vec, &rng);  // fixes a mask
  const std::vector<double> mask = acts.drop_scale;
  REQUIRE(mask.size() == model.hidden_size);

  MlpGradients grads = mlp_doc_gradient(model, vec, label, mask);
  const double step = 1e-5;
  auto check_param = [&](double& slot, double analytic) {
    const double keep = slot;
    slot = keep + step;
    const double hi = mlp_doc_loss(model, vec, label, mask);
    slot = keep - step;
    const double lo = mlp_doc_loss(model, vec, label, mask);
    slot = keep;
    const double fd = (hi - lo) / (2 * step);
    const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
    CHECK(std::abs(analytic - fd) / denom < 1e-4);
  };
  for (std::size_t i = 0; i < model.w1.size(); ++i) check_param(model.w1[i], grads.w1[i]);
  for (std::size_t i = 0; i < model.b1.size(); ++i) check_param(model.b1[i], grads.b1[i]);
  for (std::size_t i = 0; i < model.w2.size(); ++i) check_param(model.w2[i], grads.w2[i]);
  check_param(model.b2, grads.b2);
}

TEST_CASE("mlp_train: memorizes a tiny separable set within 500 epochs") {
  EightDocs fx;
  MlpPolicy policy;
  policy.hidden_size = 8;
  policy.dropout_rate = 0.0;
  policy.l2_lambda = 0.0;
  policy.stop.max_epochs = 500;
  policy.stop.patience = 500;  // never stop early
  policy.stop.learning_rate = 0.5;
  policy.stop.batch_size = 8;
  MLPModel model = mlp_train(fx.vectors, fx.labels, 3, policy, 4);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < fx.vectors.size(); ++i)
    if (mlp_predict(model, fx.vectors[i]).label == fx.labels[i]) ++hits;
  CHECK(hits == fx.vectors.size());
}

TEST_CASE("mlp_train: fixed seed reproduces parameters exactly") {
  EightDocs fx;
  MlpPolicy policy;
  policy.hidden_size = 4;
  policy.stop.max_epochs = 30;
  policy.stop.batch_size = 4;
  MLPModel a = mlp_train(fx.vectors, fx.labels, 3, policy, 21);
  MLPModel b = mlp_train(fx.vectors, fx.labels, 3, policy, 21);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);
  CHECK(a.training_trace == b.training_trace);

  MLPModel c = mlp_train(fx.vectors, fx.labels, 3, policy, 22);
  CHECK(a.w1 != c.w1);
}

TEST_CASE("mlp_train: L2 shrinks the converged weights") {
  EightDocs fx;
  MlpPolicy free_policy;
  free_policy.hidden_size = 8;
  free_policy.dropout_rate = 0.0;
  free_policy.l2_lambda = 0.0;
  free_policy.stop.max_epochs = 300;
  free_policy.stop.patience = 300;
  free_policy.stop.learning_rate = 0.5;
  free_policy.stop.batch_size = 8;
  MlpPolicy reg_policy = free_policy;
  reg_policy.l2_lambda = 1e-2;

  MLPModel free_model = mlp_train(fx.vectors, fx.labels, 3, free_policy, 6);
  MLPModel reg_model = mlp_train(fx.vectors, fx.labels, 3, reg_policy, 6);
  CHECK(l2_norm_sq(reg_model) < l2_norm_sq(free_model));
}

TEST_CASE("mlp_train: divergence is fatal, not silent") {
  EightDocs fx;
  MlpPolicy policy;
  policy.hidden_size = 4;
  policy.dropout_rate = 0.0;
  policy.stop.max_epochs = 50;
  policy.stop.learning_rate = 1e200;
  policy.stop.batch_size = 8;
  CHECK_THROWS_AS((void)mlp_train(fx.vectors, fx.labels, 3, policy, 1), DataError);
}

TEST_CASE("mlp_train: single-class input is fatal") {
  std::vector<CountVector> vectors = {cv({{0, 1}}), cv({{1, 1}})};
  std::vector<int> labels = {1, 1};
  MlpPolicy policy;
  CHECK_THROWS_AS((void)mlp_train(vectors, labels, 2, policy, 0), DataError);
}

TEST_CASE("mlp serialization round-trips probabilities exactly") {
  EightDocs fx;
  MlpPolicy policy;
  policy.hidden_size = 4;
  policy.stop.max_epochs = 20;
  MLPModel model = mlp_train(fx.vectors, fx.labels, 3, policy, 2);
  nlohmann::json doc = mlp_to_json(model, 31337);
  CHECK(doc.at("kind").get<std::string>() == "feedforward");
  MLPModel loaded = mlp_from_json(doc);
  for (const CountVector& vec : fx.vectors) {
    CHECK(mlp_predict(loaded, vec).probability == mlp_predict(model, vec).probability);
  }
}
