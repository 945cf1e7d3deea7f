#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "autowarp/error.hpp"

namespace autowarp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A trajectory is an ordered sequence of D-dimensional states, stored one
/// state per row.
struct Trajectory {
  std::string id;
  Eigen::MatrixXd states;  // n x D

  Eigen::Index length() const { return states.rows(); }
  Eigen::Index dim() const { return states.cols(); }
};

/// Per-dimension z-score record. `constant[k]` marks dimensions that had zero
/// variance and were only centred.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> constant;

  bool empty() const { return mean.size() == 0; }
};

/// Ordered collection of trajectories sharing one dimensionality, with
/// optional integer class labels aligned to trajectory order.
class TrajectoryDataset {
 public:
  TrajectoryDataset() = default;
  explicit TrajectoryDataset(std::vector<Trajectory> trajectories,
                             std::optional<std::vector<int>> labels = std::nullopt,
                             Normalization normalization = {});

  std::size_t size() const { return trajectories_.size(); }
  Eigen::Index dim() const { return trajectories_.empty() ? 0 : trajectories_.front().dim(); }
  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  const std::optional<std::vector<int>>& maybe_labels() const { return labels_; }

  const Normalization& normalization() const { return normalization_; }

  std::vector<std::string> ids() const;
  double mean_length() const;
  bool equal_lengths() const;

  TrajectoryDataset with_labels(std::vector<int> labels) const;

 private:
  std::vector<Trajectory> trajectories_;
  std::optional<std::vector<int>> labels_;
  Normalization normalization_;
};

/// Parameters (alpha, gamma, epsilon) selecting a member of the warping
/// distance family. alpha = 1 and epsilon = 1 are the limits with infinite
/// coefficient / threshold.
struct WarpParams {
  double alpha = 0.5;
  double gamma = 0.0;
  double epsilon = 1.0;

  /// alpha / (1 - alpha); +inf at alpha = 1.
  double gap_coefficient() const { return alpha >= 1.0 ? kInf : alpha / (1.0 - alpha); }
  /// epsilon / (1 - epsilon); +inf at epsilon = 1.
  double threshold() const { return epsilon >= 1.0 ? kInf : epsilon / (1.0 - epsilon); }

  void validate() const;
  bool operator==(const WarpParams&) const = default;
};

/// One latent vector per trajectory, rows aligned with `ids`.
struct LatentMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd vectors;  // T x d_h

  std::size_t size() const { return ids.size(); }
  void validate() const;
};

/// Symmetric matrix of pairwise trajectory distances.
struct DistanceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;

  std::size_t size() const { return ids.size(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
  void validate() const;
};

/// Global per-dimension z-score over every state of every trajectory,
/// population standard deviation.
TrajectoryDataset normalize_dataset(const TrajectoryDataset& ds);

/// Undo the normalization recorded in `ds`.
TrajectoryDataset denormalize_dataset(const TrajectoryDataset& ds);

/// Euclidean distances between all pairs of latent rows.
Eigen::MatrixXd latent_distances(const LatentMatrix& latents);

}  // namespace autowarp
