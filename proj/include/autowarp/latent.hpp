#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"

namespace autowarp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;
using VectorView = Eigen::Map<Eigen::VectorXd>;
using ConstVectorView = Eigen::Map<const Eigen::VectorXd>;

struct AutoencoderConfig {
  std::size_t hidden = 0;  // 0 selects round(mean length * D)
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
};

/// Hidden-size heuristic: round(L * D), at least 1.
std::size_t default_hidden_size(const TrajectoryDataset& ds);

/// Single-layer LSTM encoder, single-layer LSTM decoder fed the latent at
/// every step, and a linear read-out to D dimensions.
///
/// All weights live in one flat vector (row-major blocks, gate rows ordered
/// input, forget, output, candidate):
///   encoder W (4H x D), U (4H x H), b (4H)
///   decoder W (4H x H), U (4H x H), b (4H)
///   projection W (D x H), b (D)
class AutoencoderModel {
 public:
  AutoencoderModel() = default;
  AutoencoderModel(std::size_t input_dim, std::size_t hidden);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) initialization.
  static AutoencoderModel initialized(std::size_t input_dim, std::size_t hidden, Rng& rng);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(theta_.size()); }

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  ConstMatrixView enc_W() const { return matrix(kEncW); }
  ConstMatrixView enc_U() const { return matrix(kEncU); }
  ConstVectorView enc_b() const { return vector(kEncB); }
  ConstMatrixView dec_W() const { return matrix(kDecW); }
  ConstMatrixView dec_U() const { return matrix(kDecU); }
  ConstVectorView dec_b() const { return vector(kDecB); }
  ConstMatrixView proj_W() const { return matrix(kProjW); }
  ConstVectorView proj_b() const { return vector(kProjB); }

  MatrixView enc_W() { return matrix(kEncW); }
  MatrixView enc_U() { return matrix(kEncU); }
  VectorView enc_b() { return vector(kEncB); }
  MatrixView dec_W() { return matrix(kDecW); }
  MatrixView dec_U() { return matrix(kDecU); }
  VectorView dec_b() { return vector(kDecB); }
  MatrixView proj_W() { return matrix(kProjW); }
  VectorView proj_b() { return vector(kProjB); }

  /// Zero-valued model of the same shape (gradient accumulator).
  AutoencoderModel zeros_like() const { return AutoencoderModel(input_dim_, hidden_); }

  enum Block { kEncW, kEncU, kEncB, kDecW, kDecU, kDecB, kProjW, kProjB, kBlockCount };
  struct Shape {
    std::size_t offset, rows, cols;
  };
  Shape shape(Block b) const { return shapes_[b]; }
  static const char* block_name(Block b);

 private:
  MatrixView matrix(Block b);
  ConstMatrixView matrix(Block b) const;
  VectorView vector(Block b);
  ConstVectorView vector(Block b) const;

  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  Shape shapes_[kBlockCount] = {};
  Eigen::VectorXd theta_;
};

/// Final encoder hidden state after reading every state of the trajectory.
Eigen::VectorXd encode(const AutoencoderModel& model, const Trajectory& t);
Eigen::VectorXd encode(const AutoencoderModel& model, const Eigen::MatrixXd& states);

/// n reconstructed states from latent h.
Eigen::MatrixXd decode(const AutoencoderModel& model, const Eigen::VectorXd& h, std::size_t n);

/// (1/n) sum_t |x_t - y_t|^2 for one trajectory.
double reconstruction_loss(const AutoencoderModel& model, const Eigen::MatrixXd& states);

/// Loss and its exact gradient by backpropagation through time. `grad` must
/// be shaped like `model`; it is overwritten.
double loss_and_gradient(const AutoencoderModel& model, const Eigen::MatrixXd& states, AutoencoderModel& grad);

struct TrainResult {
  AutoencoderModel model;
  std::vector<double> loss_curve;  // mean per-trajectory loss of each epoch
};

/// Adam on per-trajectory updates, shuffled every epoch.
TrainResult train_autoencoder(const TrajectoryDataset& ds, const AutoencoderConfig& cfg);

/// Encodes every trajectory (parallel over trajectories).
LatentMatrix encode_dataset(const AutoencoderModel& model, const TrajectoryDataset& ds);

void save_checkpoint(const std::string& path, const AutoencoderModel& model);
AutoencoderModel load_checkpoint(const std::string& path);
std::string checkpoint_json(const AutoencoderModel& model);

/// Reads a Latents CSV and aligns its rows to `ids`.
LatentMatrix load_latents(const std::string& path, const std::vector<std::string>& ids);

}  // namespace autowarp
