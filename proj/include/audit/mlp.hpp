#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "audit/linear.hpp"
#include "audit/rng.hpp"
#include "audit/vectorizer.hpp"
#include "json.hpp"

namespace audit {

// Single-hidden-layer network: sparse counts -> ReLU hidden layer -> sigmoid.
struct MLPModel {
  std::uint32_t input_size = 0;
  std::uint32_t hidden_size = 0;
  std::vector<double> w1;  // input_size x hidden_size, row-major by input index
  std::vector<double> b1;  // hidden_size
  std::vector<double> w2;  // hidden_size
  double b2 = 0.0;
  double dropout_rate = 0.5;
  double l2_lambda = 1e-4;
  std::vector<double> training_trace;  // validation loss per epoch (entry 0 = pre-training)
};

struct MlpPolicy {
  EarlyStopPolicy stop;
  std::uint32_t hidden_size = 150;
  double dropout_rate = 0.5;   // in [0, 1)
  double l2_lambda = 1e-4;     // applies to w1 and w2, not biases
};

// Weights drawn uniformly from +/- sqrt(6 / (fan_in + fan_out)); biases zero.
MLPModel mlp_init(std::uint32_t input_size, std::uint32_t hidden_size, std::uint64_t seed);

struct MlpActivations {
  std::vector<double> hidden_pre;  // w1^T x + b1
  std::vector<double> hidden;      // after ReLU (and dropout scaling when training)
  std::vector<double> drop_scale;  // per-unit 0 or 1/(1-rate); empty in eval mode
  double z = 0.0;                  // w2 . hidden + b2
  double prob = 0.5;
};

// Inverted dropout: in training mode each hidden unit is zeroed with
// probability dropout_rate and survivors are scaled by 1/(1-rate), so the
// expected hidden vector matches eval mode. Pass dropout_rng = nullptr (or
// have dropout_rate == 0) for eval behavior. Non-finite activations are fatal.
MlpActivations mlp_forward(const MLPModel& model, const CountVector& vec,
                           Rng* dropout_rng = nullptr);

struct MlpGradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

// Cross-entropy of one document; drop_scale (from a training-mode forward) may
// be supplied to evaluate the dropout-masked network. No regularization term.
double mlp_doc_loss(const MLPModel& model, const CountVector& vec, int label,
                    std::span<const double> drop_scale = {});

// Dense gradient of mlp_doc_loss with respect to all parameters.
MlpGradients mlp_doc_gradient(const MLPModel& model, const CountVector& vec, int label,
                              std::span<const double> drop_scale = {});

// Mean eval-mode cross-entropy + l2_lambda * (||w1||^2 + ||w2||^2).
double mlp_loss(const MLPModel& model, std::span<const CountVector> vectors,
                std::span<const int> labels);

// Dense gradient of mlp_loss.
MlpGradients mlp_gradient(const MLPModel& model, std::span<const CountVector> vectors,
                          std::span<const int> labels);

// Same schedule as lr_train: mini-batch descent, stratified validation carve,
// patience-based early stopping, parameters returned from the best epoch.
MLPModel mlp_train(std::span<const CountVector> vectors, std::span<const int> labels,
                   std::uint32_t vocab_size, const MlpPolicy& policy, std::uint64_t seed);

struct MlpPrediction {
  int label = 0;
  double probability = 0.5;
};

MlpPrediction mlp_predict(const MLPModel& model, const CountVector& vec);

nlohmann::json mlp_to_json(const MLPModel& model, std::uint64_t vocab_hash);
MLPModel mlp_from_json(const nlohmann::json& doc);

}  // namespace audit
