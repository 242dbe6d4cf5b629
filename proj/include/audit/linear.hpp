#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "audit/vectorizer.hpp"
#include "json.hpp"

namespace audit {

// Majority-class baseline. A tie picks class 0 (fraction 0.5).
struct ZeroRuleModel {
  int majority_label = 0;
  double majority_fraction = 0.0;
};

ZeroRuleModel zero_rule_train(std::span<const int> labels);

// Shared training schedule for the gradient-descent models: mini-batch descent
// with a held-out validation split and patience-based early stopping. The
// validation split is stratified per class and takes the last
// ceil(validation_fraction * n_c) documents of each class in input order
// (capped so every class keeps at least one training document); the seed
// drives batch shuffling (and, for the network, init and dropout).
struct EarlyStopPolicy {
  double validation_fraction = 0.1;  // in (0, 0.5)
  int patience = 3;                  // epochs without improvement before stopping
  int max_epochs = 200;
  double learning_rate = 0.1;
  double l2_lambda = 0.0;
  int batch_size = 64;
};

void validate_policy(const EarlyStopPolicy& policy);

struct TrainValSplit {
  std::vector<std::size_t> train;  // input order
  std::vector<std::size_t> val;    // input order
};

TrainValSplit carve_validation(std::span<const int> labels, double fraction);

// Binary logistic regression over sparse counts.
struct LRModel {
  std::vector<double> weights;             // size = vocab_size
  double bias = 0.0;
  std::vector<double> training_trace;      // validation loss per epoch (entry 0 = pre-training)
};

// Minimizes mean binary cross-entropy + l2_lambda * ||weights||^2 and returns
// the parameters from the epoch with the lowest validation loss. A
// single-class training set is fatal (DataError); a non-finite loss is fatal.
LRModel lr_train(std::span<const CountVector> vectors, std::span<const int> labels,
                 std::uint32_t vocab_size, const EarlyStopPolicy& policy, std::uint64_t seed);

struct LRPrediction {
  int label = 0;
  double probability = 0.5;
};

// p = sigmoid(bias + sum count * weight); label 1 iff p > 0.5 (p == 0.5 -> 0).
LRPrediction lr_predict(const LRModel& model, const CountVector& vec);

// Mean binary cross-entropy over the documents plus l2 * ||weights||^2.
double lr_loss(std::span<const double> weights, double bias,
               std::span<const CountVector> vectors, std::span<const int> labels, double l2);

// Dense gradient of lr_loss; grad_w must have weights.size() entries.
void lr_gradient(std::span<const double> weights, double bias,
                 std::span<const CountVector> vectors, std::span<const int> labels, double l2,
                 std::span<double> grad_w, double& grad_b);

double sigmoid(double z);

nlohmann::json lr_to_json(const LRModel& model, std::uint64_t vocab_hash);
LRModel lr_from_json(const nlohmann::json& doc);

}  // namespace audit
