#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ubad/deviation.hpp"

namespace ubad {

struct AdadeltaParams {
  double rho = 0.95;
  double eps_opt = 1e-6;
};

struct BatchNormConfig {
  double momentum = 0.99;
  double eps = 1e-3;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  AdadeltaParams adadelta;
  BatchNormConfig bn;
  std::uint64_t shuffle_seed = 1;
  int patience = 0;  // early stop after this many epochs without improvement; 0 disables

  void validate(bool batch_norm) const;
};

// One fully-connected layer. Hidden layers run affine -> batch norm -> ReLU;
// the output layer is plain affine so reconstructions can cover [0, 1].
struct DenseLayer {
  Eigen::MatrixXd w;  // in x out
  Eigen::VectorXd b;
  bool batch_norm = false;
  bool relu = false;
  Eigen::VectorXd gamma, beta, run_mean, run_var;

  // Adadelta accumulators (squared gradient / squared update averages).
  Eigen::MatrixXd eg2_w, edx2_w;
  Eigen::VectorXd eg2_b, edx2_b, eg2_gamma, edx2_gamma, eg2_beta, edx2_beta;
};

struct LayerGrads {
  Eigen::MatrixXd w;
  Eigen::VectorXd b, gamma, beta;
};

// Deep fully-connected autoencoder trained by Adadelta on mean-squared
// reconstruction error. The decoder mirrors the encoder: widths
// n -> h1 -> ... -> hk -> h(k-1) -> ... -> h1 -> n.
class Autoencoder {
 public:
  Autoencoder() = default;

  // Deterministic for a given seed: Glorot-uniform weights drawn row by row
  // (input-major), zero biases, gamma 1, beta 0.
  static Autoencoder init(int input_dim, std::vector<int> hidden_widths, std::uint64_t seed,
                          bool batch_norm = true);

  // [64, 32, 16, 8] under 256 inputs, [512, 256, 128, 64] above; widths
  // never reach the input dimension.
  static std::vector<int> default_hidden(int input_dim);

  int input_dim() const { return input_dim_; }
  const std::vector<int>& hidden_widths() const { return hidden_; }
  std::uint64_t seed() const { return seed_; }
  bool batch_norm() const { return batch_norm_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  // Inference-mode reconstruction (running batch-norm statistics); pure.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& batch) const;

  // Training-mode forward pass (batch statistics, no state mutation).
  // Used by the trainer and by gradient checks.
  Eigen::MatrixXd forward_batchstats(const Eigen::MatrixXd& batch) const;

  // Mean-squared reconstruction error of one sample; the anomaly score.
  double score(std::span<const double> vector) const;
  double score(const FlatVector& vector) const { return score(std::span(vector.values)); }
  std::vector<double> score_batch(const Eigen::MatrixXd& batch) const;

  // Exact backpropagation of the batch-mean MSE loss in training mode.
  std::vector<LayerGrads> gradients(const Eigen::MatrixXd& batch) const;

  // Runs Adadelta over shuffled mini-batches; returns the per-epoch mean MSE
  // trace. Deterministic given data, config and seeds. Throws
  // TrainingDivergedError when the loss stops being finite.
  std::vector<double> train(const std::vector<FlatVector>& data, const TrainConfig& config);

  std::string to_json() const;
  static Autoencoder from_json(const std::string& text);
  void save(const std::string& path) const;
  static Autoencoder load(const std::string& path);

 private:
  int input_dim_ = 0;
  std::vector<int> hidden_;
  std::uint64_t seed_ = 0;
  bool batch_norm_ = true;
  BatchNormConfig bn_;
  std::vector<DenseLayer> layers_;
};

// Converts flat vectors to a row-per-sample matrix, validating dimensions.
Eigen::MatrixXd to_batch(const std::vector<FlatVector>& data, int expected_dim);

}  // namespace ubad
