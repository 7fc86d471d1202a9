#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "turbo/config.hpp"
#include "turbo/matrix.hpp"
#include "turbo/newton_schulz.hpp"

namespace turbo {

struct Dataset {
  MatrixD train_x;  ///< samples x dim
  std::vector<std::size_t> train_y;
  MatrixD val_x;
  std::vector<std::size_t> val_y;
  std::size_t classes = 0;
};

/// Isotropic Gaussian mixture with unit noise. Class c has mean
/// separation * (e_c - centroid), i.e. the vertices of a regular simplex with
/// pairwise distance separation * sqrt(2), embedded in the first `classes`
/// coordinates. Labels cycle 0, 1, ..., so every class is present once
/// samples >= classes. The first 80% of a seeded shuffle is the training set.
/// Throws InvalidArgument for classes < 2, dim < classes or samples < 2.
Dataset generate_dataset(std::uint64_t seed, std::size_t classes, std::size_t dim, std::size_t samples,
                         double separation = 4.0);

struct TrainerConfig {
  std::vector<std::size_t> layer_dims{32, 64, 10};
  double learning_rate = 0.05;
  double momentum = 0.95;
  std::size_t steps = 500;
  /// 0 picks the pipeline default: 4 for turbo, 5 otherwise.
  std::size_t ns_iterations = 0;
  Pipeline pipeline = Pipeline::muon;
  std::uint64_t seed = 0;
  std::string dataset = "gaussian_mixture";
  std::size_t samples = 4000;
  double separation = 4.0;
  std::size_t batch_size = 128;
  Precision precision = Precision::single;

  std::size_t iterations() const { return ns_iterations != 0 ? ns_iterations : (pipeline == Pipeline::turbo ? 4 : 5); }
};

/// Throws InvalidArgument when the config is inconsistent.
void validate(const TrainerConfig& config);

/// Reads the trainer keys of a config file (see README). `seeds` is not part
/// of TrainerConfig and is handled by the caller.
TrainerConfig trainer_config_from(const KeyValueConfig& kv);

struct TrainReport {
  Pipeline pipeline = Pipeline::muon;
  std::size_t ns_iterations = 0;
  std::uint64_t seed = 0;
  /// Full training-set loss before every step, then after the last one
  /// (steps + 1 entries).
  std::vector<double> loss_curve;
  /// Validation accuracy after training.
  double final_accuracy = 0.0;
  /// Per step, the smallest <M, O(M)> over the weight matrices, where M is
  /// the momentum buffer and O(M) the orthogonalized update direction.
  std::vector<double> per_step_alignment;

  double initial_loss() const { return loss_curve.front(); }
  double final_loss() const { return loss_curve.back(); }
};

/// Raised when the loss stays above 10x its initial value for 50 consecutive
/// steps.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Trains a ReLU MLP (layer_dims.size() - 1 linear layers) with softmax
/// cross-entropy and hand-written gradients. Each weight matrix W (m x n) keeps
/// a momentum buffer M <- momentum * M + grad; the update is
///   W <- W - 0.2 * learning_rate * sqrt(m * n) / ||O||_F * O,   O = orthogonalize(M)
/// so every pipeline takes steps of entry RMS 0.2 * learning_rate, whatever
/// the shape of W or the accuracy of O. Biases use plain momentum SGD with the
/// same learning rate.
TrainReport train(const TrainerConfig& config, const CoefficientSchedule& schedule);

/// One JSON object per line.
std::string to_json_line(const TrainReport& report);

}  // namespace turbo
