#include "audit/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "audit/rng.hpp"
#include "audit/types.hpp"

namespace audit {

namespace {

// Numerically stable per-document cross-entropy: softplus(z) - y * z.
inline double bce_from_logit(double z, int y) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - y * z;
}

inline double lr_logit(std::span<const double> weights, double bias, const CountVector& vec) {
  double z = bias;
  for (const auto& [idx, n] : vec.pairs) {
    if (idx >= weights.size()) throw std::out_of_range("lr: token index out of range");
    z += static_cast<double>(n) * weights[idx];
  }
  return z;
}

}  // namespace

ZeroRuleModel zero_rule_train(std::span<const int> labels) {
  if (labels.empty()) throw DataError("zero_rule_train: empty training set");
  std::size_t ones = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("zero_rule_train: labels must be 0 or 1");
    ones += y;
  }
  const std::size_t zeros = labels.size() - ones;
  ZeroRuleModel model;
  model.majority_label = ones > zeros ? 1 : 0;  // tie -> class 0
  const std::size_t majority = std::max(ones, zeros);
  model.majority_fraction = static_cast<double>(majority) / static_cast<double>(labels.size());
  return model;
}

void validate_policy(const EarlyStopPolicy& policy) {
  if (!(policy.validation_fraction > 0.0 && policy.validation_fraction < 0.5))
    throw ConfigError("early stop policy: validation_fraction must be in (0, 0.5)");
  if (policy.patience < 1) throw ConfigError("early stop policy: patience must be >= 1");
  if (policy.max_epochs < 0) throw ConfigError("early stop policy: max_epochs must be >= 0");
  if (!(policy.learning_rate > 0.0)) throw ConfigError("early stop policy: learning_rate must be > 0");
  if (policy.l2_lambda < 0.0) throw ConfigError("early stop policy: l2_lambda must be >= 0");
  if (policy.batch_size < 1) throw ConfigError("early stop policy: batch_size must be >= 1");
}

TrainValSplit carve_validation(std::span<const int> labels, double fraction) {
  // Last ceil(fraction * n_c) documents of each class, in input order. This keeps
  // the carve stable under dataset duplication and leaves >= 1 training document
  // per class.
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<char> is_val(labels.size(), 0);
  for (int c = 0; c < 2; ++c) {
    const std::size_t n = by_class[c].size();
    if (n == 0) continue;
    std::size_t take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    take = std::min(take, n - 1);
    for (std::size_t j = n - take; j < n; ++j) is_val[by_class[c][j]] = 1;
  }
  TrainValSplit split;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (is_val[i] ? split.val : split.train).push_back(i);
  }
  return split;
}

double lr_loss(std::span<const double> weights, double bias,
               std::span<const CountVector> vectors, std::span<const int> labels, double l2) {
  if (vectors.size() != labels.size() || vectors.empty())
    throw std::invalid_argument("lr_loss: bad inputs");
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    total += bce_from_logit(lr_logit(weights, bias, vectors[i]), labels[i]);
  }
  double reg = 0.0;
  for (const double w : weights) reg += w * w;
  return total / static_cast<double>(vectors.size()) + l2 * reg;
}

void lr_gradient(std::span<const double> weights, double bias,
                 std::span<const CountVector> vectors, std::span<const int> labels, double l2,
                 std::span<double> grad_w, double& grad_b) {
  if (vectors.size() != labels.size() || vectors.empty() || grad_w.size() != weights.size())
    throw std::invalid_argument("lr_gradient: bad inputs");
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double g = sigmoid(lr_logit(weights, bias, vectors[i])) - labels[i];
    for (const auto& [idx, n] : vectors[i].pairs) grad_w[idx] += g * n;
    grad_b += g;
  }
  const double inv_n = 1.0 / static_cast<double>(vectors.size());
  for (std::size_t w = 0; w < grad_w.size(); ++w) {
    grad_w[w] = grad_w[w] * inv_n + 2.0 * l2 * weights[w];
  }
  grad_b *= inv_n;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LRModel lr_train(std::span<const CountVector> vectors, std::span<const int> labels,
                 std::uint32_t vocab_size, const EarlyStopPolicy& policy, std::uint64_t seed) {
  if (vectors.size() != labels.size()) throw std::invalid_argument("lr_train: size mismatch");
  if (vectors.empty()) throw DataError("lr_train: empty training set");
  validate_policy(policy);
  bool has0 = false, has1 = false;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("lr_train: labels must be 0 or 1");
    (y == 0 ? has0 : has1) = true;
  }
  if (!has0 || !has1) throw DataError("lr_train: single-class training set");

  const TrainValSplit split = carve_validation(labels, policy.validation_fraction);
  const std::vector<std::size_t>& monitor = split.val.empty() ? split.train : split.val;

  LRModel model;
  model.weights.assign(vocab_size, 0.0);
  model.bias = 0.0;

  auto monitored_loss = [&]() {
    double total = 0.0;
    for (const std::size_t i : monitor) {
      total += bce_from_logit(lr_logit(model.weights, model.bias, vectors[i]), labels[i]);
    }
    return total / static_cast<double>(monitor.size());
  };

  double best_loss = monitored_loss();
  model.training_trace.push_back(best_loss);
  std::vector<double> best_weights = model.weights;
  double best_bias = model.bias;

  Rng rng(derive_seed(seed, {0x1c97u}));
  std::vector<std::size_t> order = split.train;
  std::vector<double> grad(vocab_size, 0.0);
  std::vector<std::uint32_t> touched;
  int epochs_since_improve = 0;

  for (int epoch = 1; epoch <= policy.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += policy.batch_size) {
      const std::size_t stop = std::min(order.size(), start + policy.batch_size);
      touched.clear();
      double grad_b = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double g = sigmoid(lr_logit(model.weights, model.bias, vectors[i])) - labels[i];
        for (const auto& [idx, n] : vectors[i].pairs) {
          if (grad[idx] == 0.0) touched.push_back(idx);
          grad[idx] += g * n;
        }
        grad_b += g;
      }
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      if (policy.l2_lambda > 0.0) {
        const double decay = 1.0 - 2.0 * policy.learning_rate * policy.l2_lambda;
        for (double& w : model.weights) w *= decay;
      }
      for (const std::uint32_t idx : touched) {
        model.weights[idx] -= policy.learning_rate * grad[idx] * inv_b;
        grad[idx] = 0.0;
      }
      model.bias -= policy.learning_rate * grad_b * inv_b;
    }
    const double loss = monitored_loss();
    if (!std::isfinite(loss))
      throw DataError("lr_train: training diverged (non-finite loss at epoch " +
                      std::to_string(epoch) + ")");
    model.training_trace.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_weights = model.weights;
      best_bias = model.bias;
      epochs_since_improve = 0;
    } else if (++epochs_since_improve >= policy.patience) {
      break;
    }
  }

  model.weights = std::move(best_weights);
  model.bias = best_bias;
  return model;
}

LRPrediction lr_predict(const LRModel& model, const CountVector& vec) {
  LRPrediction pred;
  pred.probability = sigmoid(lr_logit(model.weights, model.bias, vec));
  pred.label = pred.probability > 0.5 ? 1 : 0;
  return pred;
}

nlohmann::json lr_to_json(const LRModel& model, std::uint64_t vocab_hash) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "logistic_regression";
  doc["vocab_hash"] = vocab_hash;
  doc["weights"] = model.weights;
  doc["bias"] = model.bias;
  doc["training_trace"] = model.training_trace;
  return doc;
}

LRModel lr_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format_version", 0) != 1 ||
      doc.value("kind", "") != "logistic_regression")
    throw DataError("lr_from_json: unsupported model document");
  LRModel model;
  doc.at("weights").get_to(model.weights);
  model.bias = doc.at("bias").get<double>();
  doc.at("training_trace").get_to(model.training_trace);
  return model;
}

}  // namespace audit
