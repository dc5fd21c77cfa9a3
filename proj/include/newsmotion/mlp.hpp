#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "newsmotion/errors.hpp"
#include "newsmotion/features.hpp"
#include "newsmotion/sampling.hpp"

namespace newsmotion {

// Output unit 0 is "stock-up" (Label::positive), unit 1 is "stock-down".
struct Probabilities {
  double up = 0.5;
  double down = 0.5;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when the initial parameters were kept
  std::vector<double> train_loss;
  std::vector<double> valid_error;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

// Fully connected ReLU layers followed by a two-way softmax.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<std::size_t> dims, std::vector<Eigen::MatrixXd> weights,
           std::vector<Eigen::VectorXd> biases);

  // Glorot-uniform weights, zero biases. dims = {input, hidden..., 2}.
  static MlpModel init(std::vector<std::size_t> dims, std::uint64_t seed);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t layers() const noexcept { return weights_.size(); }

  // Layer l maps dims[l] -> dims[l + 1]; weights(l) is dims[l + 1] x dims[l].
  const Eigen::MatrixXd& weights(std::size_t l) const { return weights_[l]; }
  Eigen::MatrixXd& weights(std::size_t l) { return weights_[l]; }
  const Eigen::VectorXd& biases(std::size_t l) const { return biases_[l]; }
  Eigen::VectorXd& biases(std::size_t l) { return biases_[l]; }

  const FeatureLayout& layout() const noexcept { return layout_; }
  void set_layout(const FeatureLayout& layout);
  const TrainingMetadata& metadata() const noexcept { return metadata_; }
  TrainingMetadata& metadata() noexcept { return metadata_; }

  bool finite() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  std::vector<std::size_t> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  FeatureLayout layout_;
  TrainingMetadata metadata_;
};

// Softmax over (up, down) logits with the max subtracted first.
Probabilities softmax2(double logit_up, double logit_down);

Probabilities forward(const MlpModel& model, std::span<const double> x);

// One column per sample.
struct Batch {
  Eigen::MatrixXd inputs;
  std::vector<Label> labels;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients gradients;
};

// Mean cross-entropy plus l2/2 * sum of squared weights (biases excluded).
LossAndGradients loss_and_gradients(const MlpModel& model, const Batch& batch, double l2 = 0.0);
double loss(const MlpModel& model, const Batch& batch, double l2 = 0.0);

struct TrainConfig {
  std::vector<std::size_t> hidden{1024, 1024, 1024, 1024};
  double learning_rate = 0.01;
  double lr_decay = 0.5;          // multiplied in every `decay_every` epochs
  std::size_t decay_every = 10;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  std::size_t patience = 0;       // epochs without validation improvement; 0 disables

  void validate() const;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Mini-batch gradient descent; keeps the parameters of the epoch with the lowest
// validation error (earliest on ties).
MlpModel train(const FeatureMatrix& train_set, const FeatureMatrix& validation,
               const TrainConfig& config);

struct Prediction {
  Label label = Label::negative;
  double confidence = 0.0;  // p_up - p_down
};

// Up only when p_up > p_down; an exact tie predicts down.
Prediction to_prediction(const Probabilities& p);
// Throws ValidationError when the vector's layout differs from the model's.
Prediction predict(const MlpModel& model, const FeatureVector& x);
Prediction predict(const MlpModel& model, std::span<const double> x);

// Text header (dims, layout, metadata) followed by row-major little-endian
// float64 weights and biases, layer by layer.
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace newsmotion
