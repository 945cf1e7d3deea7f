#include "autowarp/betacv.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace autowarp {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

ThresholdSpec ThresholdSpec::at_percentile(double p) {
  AUTOWARP_REQUIRE(p > 0.0 && p <= 1.0, "threshold percentile must lie in (0, 1]");
  return {p, std::nullopt};
}

ThresholdSpec ThresholdSpec::at_delta(double d) {
  AUTOWARP_REQUIRE(d >= 0.0, "threshold delta must be >= 0");
  return {0.0, d};
}

double nearest_rank_threshold(const Eigen::MatrixXd& pairwise, double p) {
  AUTOWARP_REQUIRE(p > 0.0 && p <= 1.0, "threshold percentile must lie in (0, 1]");
  const Eigen::Index t = pairwise.rows();
  AUTOWARP_REQUIRE(t >= 2, "threshold needs at least two points");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(t * (t - 1) / 2));
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = i + 1; j < t; ++j) d.push_back(pairwise(i, j));
  std::sort(d.begin(), d.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(d.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, d.size());
  return d[rank - 1];
}

double ThresholdSpec::resolve(const Eigen::MatrixXd& latent_dist) const {
  if (delta) return *delta;
  return nearest_rank_threshold(latent_dist, percentile);
}

namespace {

double ratio(const DistanceMatrix& dm, const BoolMatrix& same) {
  const Eigen::Index t = dm.values.rows();
  AUTOWARP_REQUIRE(dm.values.cols() == t && same.rows() == t && same.cols() == t,
                   "betacv: matrix shapes disagree");
  if (!dm.values.allFinite()) throw DataError("betacv: distance matrix has non-finite entries");
  long double within = 0.0L, total = 0.0L, z = 0.0L;
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index i = 0; i < t; ++i) {
      const long double d = dm.values(i, j);
      total += d;
      if (same(i, j)) {
        within += d;
        z += 1.0;
      }
    }
  }
  if (!(total > 0.0L)) throw DataError("betacv: every pairwise distance is zero (degenerate dataset)");
  const long double tt = static_cast<long double>(t) * static_cast<long double>(t);
  return static_cast<double>((within * tt) / (z * total));
}

bool has_offdiagonal(const BoolMatrix& same) {
  for (Eigen::Index j = 0; j < same.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (same(i, j)) return true;
  return false;
}

BoolMatrix label_comembership(const std::vector<int>& labels) {
  const auto t = static_cast<Eigen::Index>(labels.size());
  BoolMatrix same(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) same(i, j) = labels[i] == labels[j];
  return same;
}

}  // namespace

double betacv(const DistanceMatrix& dm, const BoolMatrix& same) { return ratio(dm, same); }

double betacv_labeled(const DistanceMatrix& dm, const std::vector<int>& labels) {
  AUTOWARP_REQUIRE(labels.size() == dm.size(), "betacv_labeled: every id needs a label");
  const BoolMatrix same = label_comembership(labels);
  if (!has_offdiagonal(same)) throw DataError("betacv_labeled: no two trajectories share a label");
  return ratio(dm, same);
}

double betacv_labeled(const DistanceMatrix& dm, const std::map<std::string, int>& labels) {
  std::vector<int> aligned;
  aligned.reserve(dm.size());
  for (const auto& id : dm.ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw DataError("betacv_labeled: no label for id '" + id + "'");
    aligned.push_back(it->second);
  }
  return betacv_labeled(dm, aligned);
}

BoolMatrix latent_proximity(const Eigen::MatrixXd& latent_dist, double delta) {
  return (latent_dist.array() <= delta).matrix();
}

double latent_betacv(const DistanceMatrix& dm, const LatentMatrix& latents, const ThresholdSpec& spec) {
  AUTOWARP_REQUIRE(dm.ids == latents.ids, "latent_betacv: distance and latent ids are not aligned");
  const Eigen::MatrixXd ld = latent_distances(latents);
  const double delta = spec.resolve(ld);
  const BoolMatrix same = latent_proximity(ld, delta);
  if (!has_offdiagonal(same))
    throw DataError("latent_betacv: no latent pair within the threshold; use a larger percentile");
  return ratio(dm, same);
}

NoiseReport label_noise_experiment(const DistanceMatrix& dm, const std::vector<int>& labels, double p,
                                   std::size_t trials, const Rng& rng) {
  AUTOWARP_REQUIRE(!labels.empty(), "label_noise_experiment requires a labeled dataset");
  AUTOWARP_REQUIRE(labels.size() == dm.size(), "label_noise_experiment: every id needs a label");
  AUTOWARP_REQUIRE(p >= 0.0 && p <= 1.0, "flip probability must lie in [0, 1]");
  AUTOWARP_REQUIRE(trials >= 1, "need at least one trial");

  const std::set<int> class_set(labels.begin(), labels.end());
  const std::vector<int> classes(class_set.begin(), class_set.end());
  const double beta = betacv_labeled(dm, labels);

  NoiseReport rep;
  rep.trials = trials;
  rep.p = p;
  rep.deviations.resize(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    Rng r = rng.substream(k);
    std::vector<int> noisy = labels;
    for (auto& c : noisy)
      if (r.bernoulli(p)) c = classes[r.index(classes.size())];
    rep.deviations[k] = std::abs(beta - ratio(dm, label_comembership(noisy)));
  }

  double sum = 0.0;
  for (double d : rep.deviations) {
    sum += d;
    rep.max_dev = std::max(rep.max_dev, d);
  }
  rep.mean_dev = sum / static_cast<double>(trials);
  if (trials > 1) {
    double sq = 0.0;
    for (double d : rep.deviations) sq += (d - rep.mean_dev) * (d - rep.mean_dev);
    rep.std_err = std::sqrt(sq / static_cast<double>(trials - 1) / static_cast<double>(trials));
  }

  const Eigen::Index t = dm.values.rows();
  double dmax = 0.0, dsum = 0.0;
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = i + 1; j < t; ++j) {
      dmax = std::max(dmax, dm.values(i, j));
      dsum += dm.values(i, j);
    }
  const double dbar = dsum / (static_cast<double>(t) * static_cast<double>(t - 1) / 2.0);
  rep.C1 = dmax / dbar;
  std::map<int, std::size_t> counts;
  for (int c : labels) ++counts[c];
  std::size_t largest = 0, smallest = labels.size();
  for (const auto& [c, n] : counts) {
    largest = std::max(largest, n);
    smallest = std::min(smallest, n);
  }
  rep.C2 = static_cast<double>(largest) / static_cast<double>(smallest);
  rep.K = rep.C1 * rep.C2;
  return rep;
}

}  // namespace autowarp
