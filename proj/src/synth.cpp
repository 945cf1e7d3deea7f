#include "autowarp/synth.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace autowarp {

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::none;
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "outliers") return NoiseKind::outliers;
  if (name == "resample") return NoiseKind::resample;
  if (name == "hybrid_gaussian_outliers") return NoiseKind::hybrid_gaussian_outliers;
  if (name == "hybrid_gaussian_resample") return NoiseKind::hybrid_gaussian_resample;
  throw ContractError("unknown noise kind '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::outliers: return "outliers";
    case NoiseKind::resample: return "resample";
    case NoiseKind::hybrid_gaussian_outliers: return "hybrid_gaussian_outliers";
    case NoiseKind::hybrid_gaussian_resample: return "hybrid_gaussian_resample";
  }
  return "none";
}

void SynthSpec::validate() const {
  AUTOWARP_REQUIRE(seeds >= 1 && copies >= 1, "synth: seeds and copies must be >= 1");
  AUTOWARP_REQUIRE(length >= 2 && dim >= 1, "synth: length must be >= 2 and dim >= 1");
  AUTOWARP_REQUIRE(seeds * copies >= 2, "synth: need at least two trajectories");
  AUTOWARP_REQUIRE(gaussian_sigma >= 0.0, "synth: gaussian sigma must be >= 0");
  AUTOWARP_REQUIRE(outlier_rate >= 0.0 && outlier_rate <= 1.0, "synth: outlier rate must lie in [0, 1]");
  AUTOWARP_REQUIRE(outlier_magnitude >= 0.0, "synth: outlier magnitude must be >= 0");
  AUTOWARP_REQUIRE(keep_fraction > 0.0 && keep_fraction <= 1.0, "synth: keep fraction must lie in (0, 1]");
  AUTOWARP_REQUIRE(walk_step > 0.0, "synth: walk step must be > 0");
}

Eigen::MatrixXd random_walk(std::size_t length, std::size_t dim, double step, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(length);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd walk(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double x = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      x += step * rng.normal();
      walk(i, k) = x;
    }
  }
  const Eigen::RowVectorXd mean = walk.colwise().mean();
  walk.rowwise() -= mean;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double sd = std::sqrt(walk.col(k).squaredNorm() / static_cast<double>(n));
    if (sd > 0.0) walk.col(k) /= sd;
  }
  return walk;
}

Eigen::MatrixXd add_gaussian(const Eigen::MatrixXd& states, double sigma, Rng& rng) {
  Eigen::MatrixXd out = states;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) += sigma * rng.normal();
  return out;
}

Eigen::MatrixXd add_outliers(const Eigen::MatrixXd& states, double rate, double magnitude, Rng& rng) {
  Eigen::MatrixXd out = states;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (!rng.bernoulli(rate)) continue;
    Eigen::RowVectorXd dir(out.cols());
    do {
      for (Eigen::Index k = 0; k < dir.size(); ++k) dir(k) = rng.normal();
    } while (dir.norm() == 0.0);
    out.row(i) += magnitude * dir / dir.norm();
  }
  return out;
}

Eigen::MatrixXd resample(const Eigen::MatrixXd& states, double keep, Rng& rng) {
  std::vector<Eigen::Index> kept;
  while (true) {
    kept.clear();
    for (Eigen::Index i = 0; i < states.rows(); ++i)
      if (rng.bernoulli(keep)) kept.push_back(i);
    if (kept.size() >= 2 || states.rows() < 2) break;
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(kept.size()), states.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = states.row(kept[r]);
  return out;
}

TrajectoryDataset generate(const SynthSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  Rng walk_rng = root.substream("seeds");
  Rng noise_rng = root.substream("noise");

  std::vector<Eigen::MatrixXd> bases;
  for (std::size_t s = 0; s < spec.seeds; ++s) bases.push_back(random_walk(spec.length, spec.dim, spec.walk_step, walk_rng));

  std::vector<Trajectory> out;
  std::vector<int> labels;
  const std::size_t total = spec.seeds * spec.copies;
  const int width = total > 1000 ? static_cast<int>(std::to_string(total - 1).size()) : 3;
  for (std::size_t s = 0; s < spec.seeds; ++s) {
    for (std::size_t c = 0; c < spec.copies; ++c) {
      Eigen::MatrixXd x = bases[s];
      switch (spec.noise) {
        case NoiseKind::none: break;
        case NoiseKind::gaussian: x = add_gaussian(x, spec.gaussian_sigma, noise_rng); break;
        case NoiseKind::outliers: x = add_outliers(x, spec.outlier_rate, spec.outlier_magnitude, noise_rng); break;
        case NoiseKind::resample: x = resample(x, spec.keep_fraction, noise_rng); break;
        case NoiseKind::hybrid_gaussian_outliers:
          x = add_gaussian(x, spec.gaussian_sigma, noise_rng);
          x = add_outliers(x, spec.outlier_rate, spec.outlier_magnitude, noise_rng);
          break;
        case NoiseKind::hybrid_gaussian_resample:
          x = add_gaussian(x, spec.gaussian_sigma, noise_rng);
          x = resample(x, spec.keep_fraction, noise_rng);
          break;
      }
      char id[32];
      std::snprintf(id, sizeof id, "t%0*zu", width, s * spec.copies + c);
      out.push_back({id, std::move(x)});
      labels.push_back(static_cast<int>(s));
    }
  }
  return TrajectoryDataset(std::move(out), std::move(labels));
}

}  // namespace autowarp
