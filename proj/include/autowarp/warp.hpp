#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "autowarp/core.hpp"
#include "autowarp/dual.hpp"

namespace autowarp {

/// Soft threshold y * tanh(x / y), saturating x smoothly at level y.
/// Returns x exactly for y = +inf.
double soft_threshold(double x, double y);

template <typename Scalar>
Scalar soft_threshold_t(double x, const Scalar& y) {
  using std::tanh;
  return y * tanh(x / y);
}

enum class StepKind { diagonal, nondiagonal };

/// A state or the null state (treated as the origin).
using MaybeState = std::optional<Eigen::VectorXd>;

/// Cost of a single step that lands on the pair (a, b).
double step_cost(const WarpParams& params, const MaybeState& a, const MaybeState& b, StepKind kind);

/// Index pairs (i, j) visited by a warping path; index 0 is the null state.
struct WarpPath {
  std::vector<std::pair<int, int>> steps;

  bool valid_for(int n, int m) const;
};

/// (n+1) x (m+1) matrix of state distances used by every step into a cell:
/// entry (i, j) is |A_i - B_j| with index 0 meaning the origin.
Eigen::MatrixXd state_distances(const Trajectory& a, const Trajectory& b);

/// Coefficients of the step cost in a given scalar type.
template <typename Scalar>
struct StepCosts {
  Scalar gap_coef;   // alpha / (1 - alpha)
  Scalar threshold;  // epsilon / (1 - epsilon)
  Scalar gamma;
  bool gap_infinite = false;
  bool threshold_infinite = false;

  Scalar saturate(double x) const {
    if (threshold_infinite) return Scalar(x);
    return soft_threshold_t(x, threshold);
  }
  Scalar nondiagonal(const Scalar& s) const {
    if (gap_infinite) return Scalar(kInf);
    return gap_coef * s + gamma;
  }
};

StepCosts<double> step_costs(const WarpParams& params);

/// Minimum-cost warping path value by dynamic programming over the cell
/// distances `sd`. Ties prefer diagonal, then vertical (advance A), then
/// horizontal. Two rolling rows, O(n m) time.
template <typename Scalar>
Scalar warp_recursion(const StepCosts<Scalar>& costs, const Eigen::MatrixXd& sd) {
  const Eigen::Index n = sd.rows() - 1;
  const Eigen::Index m = sd.cols() - 1;
  std::vector<Scalar> prev(static_cast<std::size_t>(m + 1));
  std::vector<Scalar> cur(static_cast<std::size_t>(m + 1));
  prev[0] = Scalar(0.0);
  for (Eigen::Index j = 1; j <= m; ++j) prev[j] = prev[j - 1] + costs.nondiagonal(costs.saturate(sd(0, j)));
  for (Eigen::Index i = 1; i <= n; ++i) {
    cur[0] = prev[0] + costs.nondiagonal(costs.saturate(sd(i, 0)));
    for (Eigen::Index j = 1; j <= m; ++j) {
      const Scalar s = costs.saturate(sd(i, j));
      const Scalar gap = costs.nondiagonal(s);
      const double diag = value_of(prev[j - 1]) + value_of(s);
      const double vert = value_of(prev[j]) + value_of(gap);
      const double horiz = value_of(cur[j - 1]) + value_of(gap);
      if (diag <= vert && diag <= horiz) {
        cur[j] = prev[j - 1] + s;
      } else if (vert <= horiz) {
        cur[j] = prev[j] + gap;
      } else {
        cur[j] = cur[j - 1] + gap;
      }
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Warping distance between two trajectories under `params`.
double warp_distance(const WarpParams& params, const Trajectory& a, const Trajectory& b);
double warp_distance(const WarpParams& params, const Eigen::MatrixXd& sd);

/// Distance together with the tie-broken optimal path, by full-table
/// backtracking.
std::pair<double, WarpPath> warp_alignment(const WarpParams& params, const Trajectory& a, const Trajectory& b);

/// Exhaustive minimum over every warping path. Exponential; requires
/// n + m <= 16.
std::pair<double, WarpPath> oracle_distance(const WarpParams& params, const Trajectory& a, const Trajectory& b);

// Named members of the family.
WarpParams preset_euclidean();
WarpParams preset_dtw();
WarpParams preset_edit(double gamma0);
WarpParams preset_edr(double gamma0, double epsilon0);
/// Parses "euclidean", "dtw", "edit:G" or "edr:G:E".
WarpParams preset(std::string_view name);

/// All pairwise distances; each unordered pair is evaluated once.
DistanceMatrix pairwise_distances(const WarpParams& params, const TrajectoryDataset& ds);

/// Precomputed state-distance tables for every unordered pair, for
/// evaluating many parameter settings over the same dataset.
class PairTables {
 public:
  explicit PairTables(const TrajectoryDataset& ds);

  DistanceMatrix distances(const WarpParams& params) const;
  const Eigen::MatrixXd& table(std::size_t i, std::size_t j) const;
  std::size_t size() const { return ids_.size(); }

 private:
  std::size_t slot(std::size_t i, std::size_t j) const;

  std::vector<std::string> ids_;
  std::vector<Eigen::MatrixXd> tables_;
};

}  // namespace autowarp
