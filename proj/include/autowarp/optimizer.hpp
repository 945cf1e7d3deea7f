#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "autowarp/betacv.hpp"
#include "autowarp/core.hpp"
#include "autowarp/grad.hpp"
#include "autowarp/rng.hpp"
#include "autowarp/warp.hpp"

namespace autowarp {

struct ParamBox {
  double alpha_min = 0.0, alpha_max = 0.99;
  double gamma_min = 0.0, gamma_max = 2.0;
  double epsilon_min = 0.01, epsilon_max = 0.99;

  WarpParams project(const WarpParams& p) const;
  bool contains(const WarpParams& p) const;
};

struct OptimizerConfig {
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double percentile = 0.2;
  std::size_t restarts = 5;
  std::size_t max_steps = 500;
  std::size_t convergence_window = 20;
  double convergence_tol = 1e-4;
  ParamBox box;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  std::size_t step = 0;
  WarpParams params;
  double batch_betacv = 0.0;
};

struct RestartSummary {
  WarpParams initial;
  WarpParams final;
  double betacv = 0.0;  // full-dataset latent betaCV, NaN if aborted
  std::size_t steps = 0;
  bool converged = false;
  bool aborted = false;
  std::string note;
};

struct LearnResult {
  WarpParams params;
  double betacv = 0.0;
  std::vector<TraceRow> trace;  // winning restart
  std::size_t restart_index = 0;
  std::vector<RestartSummary> restarts;
};

struct PairBatches {
  std::vector<IndexPair> close;
  std::vector<IndexPair> all;
};

/// Unordered pairs i < j whose latent distance is within delta.
std::vector<IndexPair> close_pairs(const Eigen::MatrixXd& latent_dist, double delta);

/// S pairs drawn uniformly with replacement from the close set and S from all
/// pairs i != j.
PairBatches sample_batches(const std::vector<IndexPair>& close_set, std::size_t count, std::size_t batch_size,
                           Rng& rng);
PairBatches sample_batches(const LatentMatrix& latents, const ThresholdSpec& spec, std::size_t batch_size, Rng& rng);

/// One projected gradient step; returns the new params.
WarpParams gradient_step(const WarpParams& params, const Eigen::Vector3d& gradient, double rate,
                         const ParamBox& box);

/// Batched projected gradient descent on the latent betaCV with restarts;
/// returns the restart with the lowest full-dataset latent betaCV.
LearnResult learn(const TrajectoryDataset& ds, const LatentMatrix& latents, const OptimizerConfig& cfg);

enum class ScanMode { latent, labeled, raw_control };

struct GridPoint {
  WarpParams params;
  double betacv = 0.0;  // NaN where undefined (e.g. infinite distances)
};

struct GridResult {
  ScanMode mode = ScanMode::labeled;
  std::vector<GridPoint> points;  // alpha-major order
  std::optional<GridPoint> best;
};

struct GridSpec {
  std::vector<double> alphas;
  std::vector<double> gammas;
  double epsilon = 0.99;

  /// count evenly spaced values on [lo, hi].
  static std::vector<double> linspace(double lo, double hi, std::size_t count);
};

/// Flattened raw states as "latents" for the raw-trajectory control.
LatentMatrix flattened_states(const TrajectoryDataset& ds);

/// betaCV over an (alpha, gamma) grid at fixed epsilon.
GridResult grid_scan(const TrajectoryDataset& ds, const GridSpec& grid, ScanMode mode,
                     const LatentMatrix* latents = nullptr, double percentile = 0.2);

std::string to_string(ScanMode mode);

}  // namespace autowarp
