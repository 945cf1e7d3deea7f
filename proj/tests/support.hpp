#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"

namespace testing {

inline autowarp::Trajectory traj(const std::string& id, std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd s(n, d);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) s(r, c++) = v;
    ++r;
  }
  return {id, s};
}

inline autowarp::Trajectory random_traj(autowarp::Rng& rng, const std::string& id, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd s(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) s(i, k) = rng.normal();
  return {id, s};
}

inline autowarp::TrajectoryDataset random_dataset(autowarp::Rng& rng, std::size_t count, Eigen::Index min_len,
                                                  Eigen::Index max_len, Eigen::Index d) {
  std::vector<autowarp::Trajectory> ts;
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = min_len + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(max_len - min_len + 1)));
    ts.push_back(random_traj(rng, "r" + std::to_string(i), n, d));
  }
  return autowarp::TrajectoryDataset(std::move(ts));
}

inline autowarp::DistanceMatrix dist_matrix(const Eigen::MatrixXd& v) {
  autowarp::DistanceMatrix dm;
  for (Eigen::Index i = 0; i < v.rows(); ++i) dm.ids.push_back("p" + std::to_string(100 + i));
  dm.values = v;
  return dm;
}

}  // namespace testing
