#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"

namespace autowarp {

/// Latent proximity threshold. Either a percentile of the pairwise latent
/// distances (nearest rank over unordered pairs i < j) or an explicit delta.
struct ThresholdSpec {
  double percentile = 0.2;
  std::optional<double> delta;

  static ThresholdSpec at_percentile(double p);
  static ThresholdSpec at_delta(double d);

  /// The concrete delta for these latent distances.
  double resolve(const Eigen::MatrixXd& latent_dist) const;
};

/// Nearest-rank quantile: the ceil(p * P)-th smallest of the P unordered
/// pairwise distances (rank clamped to [1, P]).
double nearest_rank_threshold(const Eigen::MatrixXd& pairwise, double p);

/// Ratio of the mean distance over "same cluster" ordered pairs to the mean
/// over all ordered pairs. Both sums run over every ordered pair (i, j),
/// including i = j.
double betacv(const DistanceMatrix& dm, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& same);

/// betaCV using class labels aligned with dm ids.
double betacv_labeled(const DistanceMatrix& dm, const std::vector<int>& labels);
double betacv_labeled(const DistanceMatrix& dm, const std::map<std::string, int>& labels);

/// Co-membership by latent proximity: |h_i - h_j| <= delta.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> latent_proximity(const Eigen::MatrixXd& latent_dist,
                                                                     double delta);

/// betaCV with co-membership taken from latent proximity.
double latent_betacv(const DistanceMatrix& dm, const LatentMatrix& latents, const ThresholdSpec& spec);

struct NoiseReport {
  std::size_t trials = 0;
  double p = 0.0;
  std::vector<double> deviations;
  double mean_dev = 0.0;
  double max_dev = 0.0;
  double std_err = 0.0;
  double K = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
};

/// Reassigns each label with probability p (uniformly over all classes,
/// possibly to the same class) and records |beta - beta_noisy| per trial.
NoiseReport label_noise_experiment(const DistanceMatrix& dm, const std::vector<int>& labels, double p,
                                   std::size_t trials, const Rng& rng);

}  // namespace autowarp
