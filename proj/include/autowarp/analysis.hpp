#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "autowarp/betacv.hpp"
#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"
#include "autowarp/warp.hpp"

namespace autowarp {

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // one unit eigenvector per column
};

/// Top-k eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvector signs are fixed so the largest-magnitude entry is positive.
EigenPairs sym_eigen(const Eigen::MatrixXd& m, std::size_t k);
inline EigenPairs sym_eigen(const Eigen::MatrixXd& m) { return sym_eigen(m, static_cast<std::size_t>(m.rows())); }

/// Classical MDS into k dimensions (rows follow dm.ids).
Eigen::MatrixXd mds_embed(const DistanceMatrix& dm, std::size_t k = 2);

struct Clustering {
  std::vector<std::string> ids;
  std::vector<int> clusters;  // numbered by first appearance
  bool degenerate = false;    // all points identical; single cluster
};

struct KMeansResult {
  std::vector<int> assignment;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts`.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::size_t restarts, const Rng& rng);

/// Spectral clustering (Gaussian affinity with median-distance bandwidth,
/// symmetric normalized Laplacian, row-normalized embedding, k-means).
Clustering spectral_cluster(const DistanceMatrix& dm, std::size_t k, const Rng& rng);

/// Mean fraction of each trajectory's k nearest others sharing its label;
/// ties resolved by ascending id.
double knn_accuracy(const DistanceMatrix& dm, const std::vector<int>& labels, std::size_t k);

struct CompactnessPoint {
  std::size_t k = 0;
  double value = 0.0;
};

/// Mean distance to the k nearest neighbors, normalized by the global mean
/// pairwise distance, for k = 1..k_max.
std::vector<CompactnessPoint> compactness_curve(const DistanceMatrix& dm, std::size_t k_max);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct NamedParams {
  std::string name;
  WarpParams params;
};

struct ScanRow {
  std::string name;
  WarpParams params;
  double betacv = 0.0;
  double accuracy = 0.0;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  double spearman = 0.0;
};

/// `count` random params drawn uniformly from alpha in [0, 0.99], gamma in
/// [0, 1], epsilon in [0.01, 0.99].
std::vector<NamedParams> random_params(std::size_t count, Rng& rng);

/// The four standard presets with the given edit/EDR constants.
std::vector<NamedParams> preset_params(double gamma0 = 0.5, double epsilon0 = 0.5);

/// Latent betaCV and k-NN accuracy of each distance, plus their Spearman
/// correlation. Rows with infinite distances are kept but excluded from the
/// correlation.
ScanTable scan_distances(const TrajectoryDataset& ds, const LatentMatrix& latents,
                         const std::vector<NamedParams>& distances, double percentile = 0.2, std::size_t k = 7);

}  // namespace autowarp
