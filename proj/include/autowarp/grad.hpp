#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "autowarp/core.hpp"
#include "autowarp/dual.hpp"
#include "autowarp/warp.hpp"

namespace autowarp {

/// A scalar together with its gradient in (alpha, gamma, epsilon).
struct ValueGrad {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

/// Index pair (i, j) into a dataset.
using IndexPair = std::pair<std::size_t, std::size_t>;

/// Dual-valued step costs; params must satisfy alpha in [0, 1),
/// epsilon in (0, 1), gamma >= 0 so every coefficient is finite.
StepCosts<Dual3> dual_step_costs(const WarpParams& params);

/// Distance and exact derivative along the tie-broken optimal path.
ValueGrad warp_distance_grad(const WarpParams& params, const Trajectory& a, const Trajectory& b);
ValueGrad warp_distance_grad(const WarpParams& params, const Eigen::MatrixXd& sd);

/// Batched ratio sum_close d / sum_all d and its gradient by the quotient
/// rule. Per-pair work runs in parallel; sums are reduced in list order.
ValueGrad objective_grad(const WarpParams& params, const TrajectoryDataset& ds,
                         const std::vector<IndexPair>& close, const std::vector<IndexPair>& all);

/// Plain (non-dual) value of the same ratio.
double objective_value(const WarpParams& params, const TrajectoryDataset& ds,
                       const std::vector<IndexPair>& close, const std::vector<IndexPair>& all);

}  // namespace autowarp
