#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"

namespace autowarp {

enum class NoiseKind { none, gaussian, outliers, resample, hybrid_gaussian_outliers, hybrid_gaussian_resample };

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

struct SynthSpec {
  std::size_t seeds = 5;
  std::size_t copies = 10;
  std::size_t length = 30;
  std::size_t dim = 2;
  NoiseKind noise = NoiseKind::gaussian;
  double gaussian_sigma = 0.1;
  double outlier_rate = 0.2;
  double outlier_magnitude = 5.0;
  double keep_fraction = 0.5;
  double walk_step = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seed trajectory: cumulative sum of Gaussian increments, z-scored per
/// dimension.
Eigen::MatrixXd random_walk(std::size_t length, std::size_t dim, double step, Rng& rng);

// Noise operators. Each returns a new state matrix.
Eigen::MatrixXd add_gaussian(const Eigen::MatrixXd& states, double sigma, Rng& rng);
Eigen::MatrixXd add_outliers(const Eigen::MatrixXd& states, double rate, double magnitude, Rng& rng);
Eigen::MatrixXd resample(const Eigen::MatrixXd& states, double keep, Rng& rng);

/// `copies` noisy copies of each of `seeds` random walks, labeled by seed.
/// Ids are "t000", "t001", ... in seed-major order.
TrajectoryDataset generate(const SynthSpec& spec);

}  // namespace autowarp
