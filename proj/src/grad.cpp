#include "autowarp/grad.hpp"

#include <cmath>

#include "autowarp/parallel.hpp"

namespace autowarp {

StepCosts<Dual3> dual_step_costs(const WarpParams& params) {
  params.validate();
  AUTOWARP_REQUIRE(params.alpha < 1.0, "gradient requires alpha < 1");
  AUTOWARP_REQUIRE(params.epsilon < 1.0, "gradient requires epsilon < 1");
  const Dual3 alpha = Dual3::variable(params.alpha, 0);
  const Dual3 gamma = Dual3::variable(params.gamma, 1);
  const Dual3 epsilon = Dual3::variable(params.epsilon, 2);
  StepCosts<Dual3> c;
  c.gap_coef = alpha / (1.0 - alpha);
  c.threshold = epsilon / (1.0 - epsilon);
  c.gamma = gamma;
  return c;
}

ValueGrad warp_distance_grad(const WarpParams& params, const Eigen::MatrixXd& sd) {
  const Dual3 d = warp_recursion(dual_step_costs(params), sd);
  return {d.value, d.partials};
}

ValueGrad warp_distance_grad(const WarpParams& params, const Trajectory& a, const Trajectory& b) {
  return warp_distance_grad(params, state_distances(a, b));
}

namespace {

std::vector<ValueGrad> pair_grads(const WarpParams& params, const TrajectoryDataset& ds,
                                  const std::vector<IndexPair>& pairs) {
  std::vector<ValueGrad> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    AUTOWARP_REQUIRE(i < ds.size() && j < ds.size(), "pair index out of range");
    out[k] = warp_distance_grad(params, ds[i], ds[j]);
  });
  return out;
}

void check_batches(const std::vector<IndexPair>& close, const std::vector<IndexPair>& all) {
  AUTOWARP_REQUIRE(!close.empty() && !all.empty(), "objective needs non-empty batches");
}

}  // namespace

ValueGrad objective_grad(const WarpParams& params, const TrajectoryDataset& ds,
                         const std::vector<IndexPair>& close, const std::vector<IndexPair>& all) {
  check_batches(close, all);
  const auto close_grads = pair_grads(params, ds, close);
  const auto all_grads = pair_grads(params, ds, all);
  ValueGrad num, den;
  for (const auto& g : close_grads) {
    num.value += g.value;
    num.gradient += g.gradient;
  }
  for (const auto& g : all_grads) {
    den.value += g.value;
    den.gradient += g.gradient;
  }
  if (!(den.value > 0.0))
    throw DataError("batched objective has zero denominator: every sampled pair is identical; resample the batch");
  ValueGrad out;
  out.value = num.value / den.value;
  out.gradient = (num.gradient * den.value - num.value * den.gradient) / (den.value * den.value);
  return out;
}

double objective_value(const WarpParams& params, const TrajectoryDataset& ds,
                       const std::vector<IndexPair>& close, const std::vector<IndexPair>& all) {
  check_batches(close, all);
  auto sum = [&](const std::vector<IndexPair>& pairs) {
    std::vector<double> d(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
      const auto [i, j] = pairs[k];
      AUTOWARP_REQUIRE(i < ds.size() && j < ds.size(), "pair index out of range");
      d[k] = warp_distance(params, ds[i], ds[j]);
    });
    double total = 0.0;
    for (double v : d) total += v;
    return total;
  };
  const double num = sum(close);
  const double den = sum(all);
  if (!(den > 0.0))
    throw DataError("batched objective has zero denominator: every sampled pair is identical; resample the batch");
  return num / den;
}

}  // namespace autowarp
