#include "autowarp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "autowarp/parallel.hpp"

namespace autowarp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Neighbors of i (excluding i) ordered by distance, then id.
std::vector<std::size_t> neighbors(const DistanceMatrix& dm, std::size_t i) {
  std::vector<std::size_t> idx;
  idx.reserve(dm.size() - 1);
  for (std::size_t j = 0; j < dm.size(); ++j)
    if (j != i) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double da = dm(i, a), db = dm(i, b);
    if (da != db) return da < db;
    return dm.ids[a] < dm.ids[b];
  });
  return idx;
}

std::vector<int> renumber(const std::vector<int>& raw) {
  std::vector<int> map(raw.size() + 1, -1), out(raw.size());
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& m = map[static_cast<std::size_t>(raw[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
    const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t q = s; q <= e; ++q) r[idx[q]] = avg;
    s = e + 1;
  }
  return r;
}

}  // namespace

EigenPairs sym_eigen(const Eigen::MatrixXd& m, std::size_t k) {
  AUTOWARP_REQUIRE(m.rows() == m.cols(), "eigensolver needs a square matrix");
  AUTOWARP_REQUIRE(m.allFinite(), "eigensolver needs a finite matrix");
  const auto n = m.rows();
  AUTOWARP_REQUIRE(k <= static_cast<std::size_t>(n), "requested more eigenpairs than the matrix size");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  AUTOWARP_REQUIRE((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, "matrix is not symmetric");

  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-10 * std::max(1.0, a.norm());
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) >= tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  EigenPairs out{Eigen::VectorXd(static_cast<Eigen::Index>(k)), Eigen::MatrixXd(n, static_cast<Eigen::Index>(k))};
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::Index src = order[c];
    const auto col = static_cast<Eigen::Index>(c);
    out.values(col) = a(src, src);
    Eigen::VectorXd vec = v.col(src);
    Eigen::Index arg = 0;
    vec.cwiseAbs().maxCoeff(&arg);
    if (vec(arg) < 0.0) vec = -vec;
    out.vectors.col(col) = vec;
  }
  return out;
}

Eigen::MatrixXd mds_embed(const DistanceMatrix& dm, std::size_t k) {
  dm.validate();
  AUTOWARP_REQUIRE(dm.values.allFinite(), "MDS needs finite distances");
  AUTOWARP_REQUIRE(k >= 1 && k <= dm.size(), "MDS dimension must lie in [1, T]");
  const auto t = static_cast<Eigen::Index>(dm.size());
  const Eigen::MatrixXd d2 = dm.values.cwiseAbs2();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(t, t) - Eigen::MatrixXd::Constant(t, t, 1.0 / static_cast<double>(t));
  Eigen::MatrixXd b = -0.5 * j * d2 * j;
  b = 0.5 * (b + b.transpose());
  const EigenPairs e = sym_eigen(b, k);
  Eigen::MatrixXd coords(t, static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < coords.cols(); ++c)
    coords.col(c) = e.vectors.col(c) * std::sqrt(std::max(e.values(c), 0.0));
  return coords;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::size_t restarts, const Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  AUTOWARP_REQUIRE(k >= 1 && k <= n, "k-means needs 1 <= k <= number of points");
  AUTOWARP_REQUIRE(restarts >= 1, "k-means needs at least one restart");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng local = rng.substream(r);
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(local.index(n)));
    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (std::size_t c = 1; c < k; ++c) {
      const double total = d2.sum();
      std::size_t pick = 0;
      if (total > 0.0) {
        double target = local.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          target -= d2(static_cast<Eigen::Index>(i));
          if (target < 0.0 && d2(static_cast<Eigen::Index>(i)) > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = local.index(n);
      }
      centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
      d2 = d2.cwiseMin((points.rowwise() - centers.row(static_cast<Eigen::Index>(c))).rowwise().squaredNorm());
    }

    std::vector<int> assign(n, -1);
    double inertia = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        const double dist =
            (centers.rowwise() - points.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&arg);
        inertia += dist;
        if (assign[i] != static_cast<int>(arg)) {
          assign[i] = static_cast<int>(arg);
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centers.rows(), centers.cols());
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sums.row(assign[i]) += points.row(static_cast<Eigen::Index>(i));
        ++counts[static_cast<std::size_t>(assign[i])];
      }
      for (std::size_t c = 0; c < k; ++c)
        if (counts[c] > 0)
          centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.assignment = assign;
    }
  }
  best.assignment = renumber(best.assignment);
  return best;
}

Clustering spectral_cluster(const DistanceMatrix& dm, std::size_t k, const Rng& rng) {
  dm.validate();
  AUTOWARP_REQUIRE(dm.values.allFinite(), "spectral clustering needs finite distances");
  AUTOWARP_REQUIRE(k >= 2 && k <= dm.size(), "spectral clustering needs 2 <= k <= T");
  const auto t = static_cast<Eigen::Index>(dm.size());
  Clustering out{dm.ids, std::vector<int>(dm.size(), 0), false};

  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = i + 1; j < t; ++j)
      if (dm.values(i, j) > 0.0) nonzero.push_back(dm.values(i, j));
  if (nonzero.empty()) {
    out.degenerate = true;
    return out;
  }
  const auto mid = nonzero.begin() + static_cast<std::ptrdiff_t>(nonzero.size() / 2);
  std::nth_element(nonzero.begin(), mid, nonzero.end());
  double s = *mid;
  if (nonzero.size() % 2 == 0) s = 0.5 * (s + *std::max_element(nonzero.begin(), mid));

  Eigen::MatrixXd aff = (-dm.values.cwiseAbs2() / (2.0 * s * s)).array().exp().matrix();
  aff.diagonal().setZero();
  Eigen::VectorXd inv_sqrt_deg = aff.rowwise().sum();
  for (Eigen::Index i = 0; i < t; ++i)
    inv_sqrt_deg(i) = inv_sqrt_deg(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt_deg(i)) : 0.0;
  const Eigen::MatrixXd m = inv_sqrt_deg.asDiagonal() * aff * inv_sqrt_deg.asDiagonal();

  Eigen::MatrixXd emb = sym_eigen(0.5 * (m + m.transpose()), k).vectors;
  for (Eigen::Index i = 0; i < t; ++i) {
    const double nrm = emb.row(i).norm();
    if (nrm > 0.0) emb.row(i) /= nrm;
  }
  out.clusters = kmeans(emb, k, 10, rng.substream("kmeans")).assignment;
  return out;
}

double knn_accuracy(const DistanceMatrix& dm, const std::vector<int>& labels, std::size_t k) {
  dm.validate();
  AUTOWARP_REQUIRE(labels.size() == dm.size(), "labels do not match the distance matrix");
  AUTOWARP_REQUIRE(k >= 1 && k < dm.size(), "k must satisfy 1 <= k < T");
  std::vector<double> frac(dm.size());
  parallel_for(dm.size(), [&](std::size_t i) {
    const auto nb = neighbors(dm, i);
    std::size_t same = 0;
    for (std::size_t q = 0; q < k; ++q) same += labels[nb[q]] == labels[i];
    frac[i] = static_cast<double>(same) / static_cast<double>(k);
  });
  return std::accumulate(frac.begin(), frac.end(), 0.0) / static_cast<double>(dm.size());
}

std::vector<CompactnessPoint> compactness_curve(const DistanceMatrix& dm, std::size_t k_max) {
  dm.validate();
  AUTOWARP_REQUIRE(k_max >= 1 && k_max < dm.size(), "k_max must satisfy 1 <= k_max < T");
  AUTOWARP_REQUIRE(dm.values.allFinite(), "compactness needs finite distances");
  const std::size_t t = dm.size();
  double global = 0.0;
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j) global += dm(i, j);
  global /= static_cast<double>(t * (t - 1) / 2);
  if (!(global > 0.0)) throw DataError("all pairwise distances are zero; compactness is undefined");

  // prefix[i][k-1] = mean distance from i to its k nearest neighbors
  std::vector<std::vector<double>> prefix(t);
  parallel_for(t, [&](std::size_t i) {
    const auto nb = neighbors(dm, i);
    double sum = 0.0;
    prefix[i].resize(k_max);
    for (std::size_t q = 0; q < k_max; ++q) {
      sum += dm(i, nb[q]);
      prefix[i][q] = sum / static_cast<double>(q + 1);
    }
  });
  std::vector<CompactnessPoint> curve;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < t; ++i) mean += prefix[i][k - 1];
    curve.push_back({k, mean / static_cast<double>(t) / global});
  }
  return curve;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  AUTOWARP_REQUIRE(x.size() == y.size(), "spearman needs equal-length inputs");
  AUTOWARP_REQUIRE(x.size() >= 2, "spearman needs at least two points");
  const auto rx = ranks(x), ry = ranks(y);
  const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(rx.size()));
  const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(ry.size()));
  const Eigen::VectorXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
  const double denom = ca.norm() * cb.norm();
  return denom > 0.0 ? ca.dot(cb) / denom : kNaN;
}

std::vector<NamedParams> random_params(std::size_t count, Rng& rng) {
  std::vector<NamedParams> out;
  for (std::size_t r = 0; r < count; ++r) {
    const double a = rng.uniform(0.0, 0.99);
    const double g = rng.uniform(0.0, 1.0);
    const double e = rng.uniform(0.01, 0.99);
    out.push_back({"random_" + std::to_string(r), {a, g, e}});
  }
  return out;
}

std::vector<NamedParams> preset_params(double gamma0, double epsilon0) {
  return {{"euclidean", preset_euclidean()},
          {"dtw", preset_dtw()},
          {"edit", preset_edit(gamma0)},
          {"edr", preset_edr(gamma0, epsilon0)}};
}

ScanTable scan_distances(const TrajectoryDataset& ds, const LatentMatrix& latents,
                         const std::vector<NamedParams>& distances, double percentile, std::size_t k) {
  AUTOWARP_REQUIRE(ds.has_labels(), "distance scan requires labels");
  AUTOWARP_REQUIRE(latents.ids == ds.ids(), "latents are not aligned with the dataset");
  const ThresholdSpec spec = ThresholdSpec::at_percentile(percentile);
  const PairTables tables(ds);
  ScanTable table;
  std::vector<double> bs, accs;
  for (const auto& d : distances) {
    const DistanceMatrix dm = tables.distances(d.params);
    ScanRow row{d.name, d.params, kNaN, knn_accuracy(dm, ds.labels(), k)};
    if (dm.values.allFinite() && dm.values.sum() > 0.0) {
      row.betacv = latent_betacv(dm, latents, spec);
      bs.push_back(row.betacv);
      accs.push_back(row.accuracy);
    }
    table.rows.push_back(row);
  }
  table.spearman = bs.size() >= 2 ? spearman(bs, accs) : kNaN;
  return table;
}

}  // namespace autowarp
