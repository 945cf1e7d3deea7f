#include "autowarp/core.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace autowarp {

TrajectoryDataset::TrajectoryDataset(std::vector<Trajectory> trajectories,
                                     std::optional<std::vector<int>> labels,
                                     Normalization normalization)
    : trajectories_(std::move(trajectories)),
      labels_(std::move(labels)),
      normalization_(std::move(normalization)) {
  std::set<std::string> seen;
  const Eigen::Index d = dim();
  for (const auto& t : trajectories_) {
    if (!seen.insert(t.id).second) throw DataError("duplicate trajectory id '" + t.id + "'");
    if (t.length() < 1) throw DataError("trajectory '" + t.id + "' is empty");
    if (t.dim() < 1 || t.dim() != d) {
      std::ostringstream os;
      os << "trajectory '" << t.id << "' has dimension " << t.dim() << ", expected " << d;
      throw DataError(os.str());
    }
    if (!t.states.allFinite()) throw DataError("trajectory '" + t.id + "' has non-finite states");
  }
  if (labels_ && labels_->size() != trajectories_.size())
    throw DataError("label count does not match trajectory count");
}

const std::vector<int>& TrajectoryDataset::labels() const {
  if (!labels_) throw ContractError("dataset has no labels");
  return *labels_;
}

std::vector<std::string> TrajectoryDataset::ids() const {
  std::vector<std::string> out;
  out.reserve(trajectories_.size());
  for (const auto& t : trajectories_) out.push_back(t.id);
  return out;
}

double TrajectoryDataset::mean_length() const {
  if (trajectories_.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : trajectories_) total += static_cast<double>(t.length());
  return total / static_cast<double>(trajectories_.size());
}

bool TrajectoryDataset::equal_lengths() const {
  for (const auto& t : trajectories_)
    if (t.length() != trajectories_.front().length()) return false;
  return true;
}

TrajectoryDataset TrajectoryDataset::with_labels(std::vector<int> labels) const {
  return TrajectoryDataset(trajectories_, std::move(labels), normalization_);
}

void WarpParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ContractError("gamma must be finite and >= 0");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ContractError("epsilon must lie in (0, 1]");
}

void LatentMatrix::validate() const {
  if (static_cast<Eigen::Index>(ids.size()) != vectors.rows())
    throw DataError("latent id count does not match row count");
  if (!vectors.allFinite()) throw DataError("latent matrix has non-finite entries");
}

void DistanceMatrix::validate() const {
  const auto t = static_cast<Eigen::Index>(ids.size());
  if (values.rows() != t || values.cols() != t) throw DataError("distance matrix shape does not match ids");
  for (Eigen::Index i = 0; i < t; ++i) {
    if (values(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < t; ++j) {
      if (!(values(i, j) >= 0.0)) throw DataError("distance matrix has negative or NaN entries");
      if (values(i, j) != values(j, i)) throw DataError("distance matrix is not symmetric");
    }
  }
}

TrajectoryDataset normalize_dataset(const TrajectoryDataset& ds) {
  AUTOWARP_REQUIRE(ds.size() >= 2, "normalize_dataset needs at least two trajectories");
  const Eigen::Index d = ds.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double count = 0.0;
  for (const auto& t : ds.trajectories()) {
    sum += t.states.colwise().sum().transpose();
    count += static_cast<double>(t.length());
  }
  const Eigen::VectorXd mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  for (const auto& t : ds.trajectories())
    sq += (t.states.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  Eigen::VectorXd stddev = (sq / count).cwiseSqrt();

  std::vector<bool> constant(static_cast<std::size_t>(d), false);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (stddev(k) <= 1e-300) {
      stddev(k) = 1.0;
      constant[static_cast<std::size_t>(k)] = true;
    }
  }

  std::vector<Trajectory> out;
  out.reserve(ds.size());
  for (const auto& t : ds.trajectories()) {
    Eigen::MatrixXd s = (t.states.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
    out.push_back({t.id, std::move(s)});
  }

  // Compose with any earlier record so denormalize always returns raw units.
  Normalization rec;
  const Normalization& prev = ds.normalization();
  if (prev.empty()) {
    rec = {mean, stddev, constant};
  } else {
    rec.mean = prev.mean + prev.stddev.cwiseProduct(mean);
    rec.stddev = prev.stddev.cwiseProduct(stddev);
    rec.constant = constant;
    for (std::size_t k = 0; k < constant.size(); ++k) rec.constant[k] = constant[k] || prev.constant[k];
  }
  return TrajectoryDataset(std::move(out), ds.maybe_labels(), std::move(rec));
}

TrajectoryDataset denormalize_dataset(const TrajectoryDataset& ds) {
  const Normalization& rec = ds.normalization();
  if (rec.empty()) return ds;
  std::vector<Trajectory> out;
  out.reserve(ds.size());
  for (const auto& t : ds.trajectories()) {
    Eigen::MatrixXd s = (t.states.array().rowwise() * rec.stddev.transpose().array()).matrix().rowwise() +
                        rec.mean.transpose();
    out.push_back({t.id, std::move(s)});
  }
  return TrajectoryDataset(std::move(out), ds.maybe_labels());
}

Eigen::MatrixXd latent_distances(const LatentMatrix& latents) {
  const Eigen::Index t = latents.vectors.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = i + 1; j < t; ++j)
      out(i, j) = out(j, i) = (latents.vectors.row(i) - latents.vectors.row(j)).norm();
  return out;
}

}  // namespace autowarp
