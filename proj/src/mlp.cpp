#include "audit/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "audit/types.hpp"

namespace audit {

namespace {

inline double bce_from_logit(double z, int y) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - y * z;
}

void validate_mlp_policy(const MlpPolicy& policy) {
  validate_policy(policy.stop);
  if (policy.hidden_size == 0) throw ConfigError("mlp policy: hidden_size must be >= 1");
  if (!(policy.dropout_rate >= 0.0 && policy.dropout_rate < 1.0))
    throw ConfigError("mlp policy: dropout_rate must be in [0, 1)");
  if (policy.l2_lambda < 0.0) throw ConfigError("mlp policy: l2_lambda must be >= 0");
}

// hidden_pre = w1^T x + b1 for sparse counts
void hidden_pre_activation(const MLPModel& model, const CountVector& vec, double* out) {
  const std::uint32_t h = model.hidden_size;
  std::copy(model.b1.begin(), model.b1.end(), out);
  for (const auto& [idx, n] : vec.pairs) {
    if (idx >= model.input_size) throw std::out_of_range("mlp: token index out of range");
    const double* row = &model.w1[static_cast<std::size_t>(idx) * h];
    const double count = static_cast<double>(n);
    for (std::uint32_t j = 0; j < h; ++j) out[j] += count * row[j];
  }
}

}  // namespace

MLPModel mlp_init(std::uint32_t input_size, std::uint32_t hidden_size, std::uint64_t seed) {
  if (input_size == 0 || hidden_size == 0)
    throw std::invalid_argument("mlp_init: layer sizes must be >= 1");
  MLPModel model;
  model.input_size = input_size;
  model.hidden_size = hidden_size;
  model.w1.resize(static_cast<std::size_t>(input_size) * hidden_size);
  model.b1.assign(hidden_size, 0.0);
  model.w2.resize(hidden_size);
  model.b2 = 0.0;
  Rng rng(derive_seed(seed, {0x171u}));
  const double limit1 = std::sqrt(6.0 / (static_cast<double>(input_size) + hidden_size));
  for (double& w : model.w1) w = (2.0 * rng.uniform() - 1.0) * limit1;
  const double limit2 = std::sqrt(6.0 / (static_cast<double>(hidden_size) + 1.0));
  for (double& w : model.w2) w = (2.0 * rng.uniform() - 1.0) * limit2;
  return model;
}

MlpActivations mlp_forward(const MLPModel& model, const CountVector& vec, Rng* dropout_rng) {
  MlpActivations act;
  const std::uint32_t h = model.hidden_size;
  act.hidden_pre.resize(h);
  hidden_pre_activation(model, vec, act.hidden_pre.data());
  act.hidden.resize(h);
  const bool training = dropout_rng != nullptr && model.dropout_rate > 0.0;
  if (training) {
    act.drop_scale.resize(h);
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
    for (std::uint32_t j = 0; j < h; ++j) {
      act.drop_scale[j] = dropout_rng->uniform() < model.dropout_rate ? 0.0 : keep_scale;
    }
  }
  act.z = model.b2;
  for (std::uint32_t j = 0; j < h; ++j) {
    double v = act.hidden_pre[j] > 0.0 ? act.hidden_pre[j] : 0.0;
    if (training) v *= act.drop_scale[j];
    act.hidden[j] = v;
    act.z += model.w2[j] * v;
  }
  if (!std::isfinite(act.z)) throw DataError("mlp_forward: non-finite activation");
  act.prob = sigmoid(act.z);
  return act;
}

double mlp_doc_loss(const MLPModel& model, const CountVector& vec, int label,
                    std::span<const double> drop_scale) {
  const std::uint32_t h = model.hidden_size;
  std::vector<double> pre(h);
  hidden_pre_activation(model, vec, pre.data());
  double z = model.b2;
  for (std::uint32_t j = 0; j < h; ++j) {
    double v = pre[j] > 0.0 ? pre[j] : 0.0;
    if (!drop_scale.empty()) v *= drop_scale[j];
    z += model.w2[j] * v;
  }
  return bce_from_logit(z, label);
}

MlpGradients mlp_doc_gradient(const MLPModel& model, const CountVector& vec, int label,
                              std::span<const double> drop_scale) {
  const std::uint32_t h = model.hidden_size;
  MlpGradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(h, 0.0);
  g.w2.assign(h, 0.0);

  std::vector<double> pre(h);
  hidden_pre_activation(model, vec, pre.data());
  std::vector<double> hidden(h);
  double z = model.b2;
  for (std::uint32_t j = 0; j < h; ++j) {
    double v = pre[j] > 0.0 ? pre[j] : 0.0;
    if (!drop_scale.empty()) v *= drop_scale[j];
    hidden[j] = v;
    z += model.w2[j] * v;
  }
  const double delta = sigmoid(z) - label;
  g.b2 = delta;
  std::vector<double> dpre(h);
  for (std::uint32_t j = 0; j < h; ++j) {
    g.w2[j] = delta * hidden[j];
    double dh = delta * model.w2[j];
    if (!drop_scale.empty()) dh *= drop_scale[j];
    dpre[j] = pre[j] > 0.0 ? dh : 0.0;
    g.b1[j] = dpre[j];
  }
  for (const auto& [idx, n] : vec.pairs) {
    double* row = &g.w1[static_cast<std::size_t>(idx) * h];
    const double count = static_cast<double>(n);
    for (std::uint32_t j = 0; j < h; ++j) row[j] += count * dpre[j];
  }
  return g;
}

double mlp_loss(const MLPModel& model, std::span<const CountVector> vectors,
                std::span<const int> labels) {
  if (vectors.size() != labels.size() || vectors.empty())
    throw std::invalid_argument("mlp_loss: bad inputs");
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    total += mlp_doc_loss(model, vectors[i], labels[i]);
  }
  double reg = 0.0;
  for (const double w : model.w1) reg += w * w;
  for (const double w : model.w2) reg += w * w;
  return total / static_cast<double>(vectors.size()) + model.l2_lambda * reg;
}

MlpGradients mlp_gradient(const MLPModel& model, std::span<const CountVector> vectors,
                          std::span<const int> labels) {
  if (vectors.size() != labels.size() || vectors.empty())
    throw std::invalid_argument("mlp_gradient: bad inputs");
  MlpGradients total;
  total.w1.assign(model.w1.size(), 0.0);
  total.b1.assign(model.hidden_size, 0.0);
  total.w2.assign(model.hidden_size, 0.0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const MlpGradients g = mlp_doc_gradient(model, vectors[i], labels[i]);
    for (std::size_t k = 0; k < total.w1.size(); ++k) total.w1[k] += g.w1[k];
    for (std::size_t k = 0; k < total.b1.size(); ++k) total.b1[k] += g.b1[k];
    for (std::size_t k = 0; k < total.w2.size(); ++k) total.w2[k] += g.w2[k];
    total.b2 += g.b2;
  }
  const double inv_n = 1.0 / static_cast<double>(vectors.size());
  for (std::size_t k = 0; k < total.w1.size(); ++k)
    total.w1[k] = total.w1[k] * inv_n + 2.0 * model.l2_lambda * model.w1[k];
  for (double& v : total.b1) v *= inv_n;
  for (std::size_t k = 0; k < total.w2.size(); ++k)
    total.w2[k] = total.w2[k] * inv_n + 2.0 * model.l2_lambda * model.w2[k];
  total.b2 *= inv_n;
  return total;
}

MLPModel mlp_train(std::span<const CountVector> vectors, std::span<const int> labels,
                   std::uint32_t vocab_size, const MlpPolicy& policy, std::uint64_t seed) {
  if (vectors.size() != labels.size()) throw std::invalid_argument("mlp_train: size mismatch");
  if (vectors.empty()) throw DataError("mlp_train: empty training set");
  validate_mlp_policy(policy);
  if (vocab_size == 0) throw DataError("mlp_train: empty vocabulary");
  bool has0 = false, has1 = false;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("mlp_train: labels must be 0 or 1");
    (y == 0 ? has0 : has1) = true;
  }
  if (!has0 || !has1) throw DataError("mlp_train: single-class training set");

  MLPModel model = mlp_init(vocab_size, policy.hidden_size, derive_seed(seed, {0x9e1u}));
  model.dropout_rate = policy.dropout_rate;
  model.l2_lambda = policy.l2_lambda;

  const TrainValSplit split = carve_validation(labels, policy.stop.validation_fraction);
  const std::vector<std::size_t>& monitor = split.val.empty() ? split.train : split.val;
  const std::uint32_t h = model.hidden_size;

  auto monitored_loss = [&]() {
    double total = 0.0;
    for (const std::size_t i : monitor) total += mlp_doc_loss(model, vectors[i], labels[i]);
    return total / static_cast<double>(monitor.size());
  };

  double best_loss = monitored_loss();
  model.training_trace.push_back(best_loss);
  std::vector<double> best_w1 = model.w1;
  std::vector<double> best_b1 = model.b1;
  std::vector<double> best_w2 = model.w2;
  double best_b2 = model.b2;

  Rng shuffle_rng(derive_seed(seed, {0x5a11u}));
  Rng dropout_rng(derive_seed(seed, {0xd0d0u}));
  std::vector<std::size_t> order = split.train;
  std::vector<double> gw1(model.w1.size(), 0.0);
  std::vector<char> row_touched(vocab_size, 0);
  std::vector<std::uint32_t> touched;
  std::vector<double> gb1(h), gw2(h), dpre(h);
  int epochs_since_improve = 0;

  for (int epoch = 1; epoch <= policy.stop.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(policy.stop.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(policy.stop.batch_size));
      touched.clear();
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      double gb2 = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const MlpActivations act = mlp_forward(model, vectors[i], &dropout_rng);
        const double delta = act.prob - labels[i];
        gb2 += delta;
        const bool dropped = !act.drop_scale.empty();
        for (std::uint32_t j = 0; j < h; ++j) {
          gw2[j] += delta * act.hidden[j];
          double dh = delta * model.w2[j];
          if (dropped) dh *= act.drop_scale[j];
          const double dp = act.hidden_pre[j] > 0.0 ? dh : 0.0;
          dpre[j] = dp;
          gb1[j] += dp;
        }
        for (const auto& [idx, n] : vectors[i].pairs) {
          if (!row_touched[idx]) {
            row_touched[idx] = 1;
            touched.push_back(idx);
          }
          double* row = &gw1[static_cast<std::size_t>(idx) * h];
          const double count = static_cast<double>(n);
          for (std::uint32_t j = 0; j < h; ++j) row[j] += count * dpre[j];
        }
      }
      const double lr = policy.stop.learning_rate;
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      if (policy.l2_lambda > 0.0) {
        const double decay = 1.0 - 2.0 * lr * policy.l2_lambda;
        for (double& w : model.w1) w *= decay;
        for (double& w : model.w2) w *= decay;
      }
      for (const std::uint32_t idx : touched) {
        double* grow = &gw1[static_cast<std::size_t>(idx) * h];
        double* wrow = &model.w1[static_cast<std::size_t>(idx) * h];
        for (std::uint32_t j = 0; j < h; ++j) {
          wrow[j] -= lr * grow[j] * inv_b;
          grow[j] = 0.0;
        }
        row_touched[idx] = 0;
      }
      for (std::uint32_t j = 0; j < h; ++j) {
        model.w2[j] -= lr * gw2[j] * inv_b;
        model.b1[j] -= lr * gb1[j] * inv_b;
      }
      model.b2 -= lr * gb2 * inv_b;
    }
    const double loss = monitored_loss();
    if (!std::isfinite(loss))
      throw DataError("mlp_train: training diverged (non-finite loss at epoch " +
                      std::to_string(epoch) + ")");
    model.training_trace.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_w1 = model.w1;
      best_b1 = model.b1;
      best_w2 = model.w2;
      best_b2 = model.b2;
      epochs_since_improve = 0;
    } else if (++epochs_since_improve >= policy.stop.patience) {
      break;
    }
  }

  model.w1 = std::move(best_w1);
  model.b1 = std::move(best_b1);
  model.w2 = std::move(best_w2);
  model.b2 = best_b2;
  return model;
}

MlpPrediction mlp_predict(const MLPModel& model, const CountVector& vec) {
  const MlpActivations act = mlp_forward(model, vec);
  return {act.prob > 0.5 ? 1 : 0, act.prob};
}

nlohmann::json mlp_to_json(const MLPModel& model, std::uint64_t vocab_hash) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "feedforward";
  doc["vocab_hash"] = vocab_hash;
  doc["input_size"] = model.input_size;
  doc["hidden_size"] = model.hidden_size;
  doc["w1"] = model.w1;
  doc["b1"] = model.b1;
  doc["w2"] = model.w2;
  doc["b2"] = model.b2;
  doc["dropout_rate"] = model.dropout_rate;
  doc["l2_lambda"] = model.l2_lambda;
  doc["training_trace"] = model.training_trace;
  return doc;
}

MLPModel mlp_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format_version", 0) != 1 ||
      doc.value("kind", "") != "feedforward")
    throw DataError("mlp_from_json: unsupported model document");
  MLPModel model;
  model.input_size = doc.at("input_size").get<std::uint32_t>();
  model.hidden_size = doc.at("hidden_size").get<std::uint32_t>();
  doc.at("w1").get_to(model.w1);
  doc.at("b1").get_to(model.b1);
  doc.at("w2").get_to(model.w2);
  model.b2 = doc.at("b2").get<double>();
  model.dropout_rate = doc.at("dropout_rate").get<double>();
  model.l2_lambda = doc.at("l2_lambda").get<double>();
  doc.at("training_trace").get_to(model.training_trace);
  if (model.w1.size() != static_cast<std::size_t>(model.input_size) * model.hidden_size ||
      model.b1.size() != model.hidden_size || model.w2.size() != model.hidden_size)
    throw DataError("mlp_from_json: parameter shape mismatch");
  return model;
}

}  // namespace audit
