#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "genreforge/corpus.h"
#include "genreforge/encoding.h"
#include "genreforge/matrix.h"

namespace genreforge {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 20;
  std::size_t batch_size = 64;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  std::size_t hidden_dim = 0;  // 0 = logistic regression; 64 for the MLP head

  void validate() const;
};

// Parameters of f_theta. Logistic regression when hidden_dim == 0:
//   p = sigmoid(output_weights . x + output_bias)
// otherwise one tanh layer:
//   p = sigmoid(output_weights . tanh(hidden_weights x + hidden_bias) + output_bias)
// hidden_weights is row-major hidden_dim x input_dim.
struct HeadParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> hidden_weights;
  std::vector<double> hidden_bias;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  static HeadParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  // Uniform +-1/sqrt(fan_in) weights, zero biases.
  static HeadParams random(std::size_t input_dim, std::size_t hidden_dim,
                           std::uint64_t seed);

  std::size_t parameter_count() const;
  // Flat view order: hidden_weights, hidden_bias, output_weights, output_bias.
  double& parameter(std::size_t i);
  double parameter(std::size_t i) const;

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

double sigmoid(double z);

// Pre-sigmoid score. Throws kShapeMismatch on a wrong input length.
double logit(const HeadParams& head, std::span<const double> x);
double forward(const HeadParams& head, std::span<const double> x);
// Strict threshold: 1 iff f(x) > 0.5, i.e. iff logit(x) > 0.
int predict(const HeadParams& head, std::span<const double> x);
int label_from_probability(double p);

inline constexpr double kProbabilityClamp = 1e-12;

struct LossGrad {
  double loss = 0.0;
  HeadParams grad;
};

// Mean binary cross-entropy over `rows` of X plus l2 * ||weights||^2
// (biases are not penalized). Probabilities are clamped to
// [1e-12, 1 - 1e-12] inside the log.
LossGrad loss_and_grad(const HeadParams& head, const Matrix& X,
                       std::span<const int> labels,
                       std::span<const std::size_t> rows, double l2);
LossGrad loss_and_grad(const HeadParams& head, const Matrix& X,
                       std::span<const int> labels, double l2);

struct HeadTrainResult {
  HeadParams head;
  std::vector<double> epoch_loss;  // full training-set loss after each epoch
};

// Mini-batch gradient descent with seeded init and per-epoch shuffles.
// Throws kSingleClassTrainSet.
HeadTrainResult train_head(const Matrix& X, std::span<const int> labels,
                           const TrainConfig& config);

struct ClassifierModel {
  std::string model_id;
  Task task{Genre::Drama, Genre::Novel};
  Language language = Language::EN;
  EncoderConfig encoder;
  FeatureSpec features;
  FeatureStats stats;
  Layout layout;
  TrainConfig train_config;
  HeadParams head;
  double threshold = 0.5;
  std::string cache_key;  // set by the pipeline; empty otherwise
};

struct TrainResult {
  ClassifierModel model;
  std::vector<double> epoch_loss;
};

// Builds I = S (+) F for one record under the model's configuration.
InputVector model_input(const ClassifierModel& model, std::string_view text,
                        const LinguisticFeatures& features);

// Trains on the Train split of `dataset`. Feature statistics and the
// default metre pad length come from Train records only.
TrainResult train(const PairDataset& dataset, const FeatureStore& store,
                  const EncoderConfig& encoder, const FeatureSpec& features,
                  const TrainConfig& config, std::string model_id = "");

struct Predictions {
  std::vector<int> predicted;
  std::vector<int> labels;
};

// Predicts every record of `split`.
Predictions predict_split(const ClassifierModel& model,
                          const PairDataset& dataset, const FeatureStore& store,
                          Split split);

// Versioned JSON model file. load_model throws kLayoutMismatch when the
// stored layout disagrees with the encoder/feature configuration or the
// weight shapes.
std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(std::string_view json);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

inline constexpr int kModelFormatVersion = 1;

}  // namespace genreforge
