#include "autowarp/warp.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "autowarp/parallel.hpp"

namespace autowarp {

double soft_threshold(double x, double y) {
  AUTOWARP_REQUIRE(x >= 0.0 && std::isfinite(x), "soft_threshold: x must be finite and non-negative");
  AUTOWARP_REQUIRE(y > 0.0, "soft_threshold: threshold must be positive");
  if (std::isinf(y)) return x;
  return y * std::tanh(x / y);
}

namespace {

double state_gap(const MaybeState& a, const MaybeState& b) {
  if (a && b) {
    AUTOWARP_REQUIRE(a->size() == b->size(), "step_cost: state dimensions differ");
    return (*a - *b).norm();
  }
  return a ? a->norm() : b->norm();
}

void require_same_dim(const Trajectory& a, const Trajectory& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "trajectories '" << a.id << "' (D=" << a.dim() << ") and '" << b.id << "' (D=" << b.dim()
       << ") differ in dimension";
    throw ContractError(os.str());
  }
}

}  // namespace

double step_cost(const WarpParams& params, const MaybeState& a, const MaybeState& b, StepKind kind) {
  AUTOWARP_REQUIRE(a || b, "step_cost: both states null");
  params.validate();
  const double s = soft_threshold(state_gap(a, b), params.threshold());
  if (kind == StepKind::diagonal) return s;
  if (params.alpha >= 1.0) return kInf;
  return params.gap_coefficient() * s + params.gamma;
}

bool WarpPath::valid_for(int n, int m) const {
  if (steps.empty() || steps.front() != std::pair{0, 0} || steps.back() != std::pair{n, m}) return false;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const int di = steps[k].first - steps[k - 1].first;
    const int dj = steps[k].second - steps[k - 1].second;
    if (!((di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1))) return false;
  }
  return true;
}

Eigen::MatrixXd state_distances(const Trajectory& a, const Trajectory& b) {
  require_same_dim(a, b);
  const Eigen::Index n = a.length();
  const Eigen::Index m = b.length();
  Eigen::MatrixXd sd(n + 1, m + 1);
  sd(0, 0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) sd(i, 0) = a.states.row(i - 1).norm();
  for (Eigen::Index j = 1; j <= m; ++j) sd(0, j) = b.states.row(j - 1).norm();
  for (Eigen::Index j = 1; j <= m; ++j)
    for (Eigen::Index i = 1; i <= n; ++i) sd(i, j) = (a.states.row(i - 1) - b.states.row(j - 1)).norm();
  return sd;
}

StepCosts<double> step_costs(const WarpParams& params) {
  params.validate();
  StepCosts<double> c;
  c.gap_infinite = params.alpha >= 1.0;
  c.threshold_infinite = params.epsilon >= 1.0;
  c.gap_coef = c.gap_infinite ? kInf : params.gap_coefficient();
  c.threshold = c.threshold_infinite ? kInf : params.threshold();
  c.gamma = params.gamma;
  return c;
}

double warp_distance(const WarpParams& params, const Eigen::MatrixXd& sd) {
  return warp_recursion(step_costs(params), sd);
}

double warp_distance(const WarpParams& params, const Trajectory& a, const Trajectory& b) {
  return warp_distance(params, state_distances(a, b));
}

std::pair<double, WarpPath> warp_alignment(const WarpParams& params, const Trajectory& a,
                                           const Trajectory& b) {
  const auto costs = step_costs(params);
  const Eigen::MatrixXd sd = state_distances(a, b);
  const Eigen::Index n = sd.rows() - 1;
  const Eigen::Index m = sd.cols() - 1;

  // move(i, j): 0 diagonal, 1 vertical (from i-1), 2 horizontal (from j-1)
  Eigen::MatrixXd table(n + 1, m + 1);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> move(n + 1, m + 1);
  table(0, 0) = 0.0;
  for (Eigen::Index j = 1; j <= m; ++j) {
    table(0, j) = table(0, j - 1) + costs.nondiagonal(costs.saturate(sd(0, j)));
    move(0, j) = 2;
  }
  for (Eigen::Index i = 1; i <= n; ++i) {
    table(i, 0) = table(i - 1, 0) + costs.nondiagonal(costs.saturate(sd(i, 0)));
    move(i, 0) = 1;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double s = costs.saturate(sd(i, j));
      const double gap = costs.nondiagonal(s);
      const double diag = table(i - 1, j - 1) + s;
      const double vert = table(i - 1, j) + gap;
      const double horiz = table(i, j - 1) + gap;
      if (diag <= vert && diag <= horiz) {
        table(i, j) = diag;
        move(i, j) = 0;
      } else if (vert <= horiz) {
        table(i, j) = vert;
        move(i, j) = 1;
      } else {
        table(i, j) = horiz;
        move(i, j) = 2;
      }
    }
  }

  WarpPath path;
  Eigen::Index i = n, j = m;
  path.steps.emplace_back(static_cast<int>(i), static_cast<int>(j));
  while (i > 0 || j > 0) {
    switch (move(i, j)) {
      case 0: --i; --j; break;
      case 1: --i; break;
      default: --j; break;
    }
    path.steps.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return {table(n, m), std::move(path)};
}

namespace {

struct Enumerator {
  const WarpParams& params;
  const Trajectory& a;
  const Trajectory& b;
  int n, m;
  std::vector<std::pair<int, int>> current;
  double best = kInf;
  WarpPath best_path;

  MaybeState state_a(int i) const {
    if (i == 0) return std::nullopt;
    return Eigen::VectorXd(a.states.row(i - 1).transpose());
  }
  MaybeState state_b(int j) const {
    if (j == 0) return std::nullopt;
    return Eigen::VectorXd(b.states.row(j - 1).transpose());
  }

  void walk(int i, int j, double cost) {
    if (i == n && j == m) {
      if (best_path.steps.empty() || cost < best) {
        best = cost;
        best_path.steps = current;
      }
      return;
    }
    const std::pair<int, int> moves[] = {{1, 1}, {1, 0}, {0, 1}};
    for (auto [di, dj] : moves) {
      const int ni = i + di, nj = j + dj;
      if (ni > n || nj > m) continue;
      const auto kind = (di == 1 && dj == 1) ? StepKind::diagonal : StepKind::nondiagonal;
      current.emplace_back(ni, nj);
      walk(ni, nj, cost + step_cost(params, state_a(ni), state_b(nj), kind));
      current.pop_back();
    }
  }
};

}  // namespace

std::pair<double, WarpPath> oracle_distance(const WarpParams& params, const Trajectory& a, const Trajectory& b) {
  require_same_dim(a, b);
  const int n = static_cast<int>(a.length());
  const int m = static_cast<int>(b.length());
  AUTOWARP_REQUIRE(n + m <= 16, "oracle_distance: n + m must not exceed 16");
  Enumerator e{params, a, b, n, m, {{0, 0}}, kInf, {}};
  e.walk(0, 0, 0.0);
  return {e.best, std::move(e.best_path)};
}

WarpParams preset_euclidean() { return {1.0, 0.0, 1.0}; }
WarpParams preset_dtw() { return {0.5, 0.0, 1.0}; }

WarpParams preset_edit(double gamma0) {
  AUTOWARP_REQUIRE(gamma0 > 0.0, "edit preset needs gamma0 > 0");
  return {0.0, gamma0, 1.0};
}

WarpParams preset_edr(double gamma0, double epsilon0) {
  AUTOWARP_REQUIRE(gamma0 > 0.0, "edr preset needs gamma0 > 0");
  AUTOWARP_REQUIRE(epsilon0 > 0.0 && epsilon0 < 1.0, "edr preset needs 0 < epsilon0 < 1");
  return {0.0, gamma0, epsilon0};
}

namespace {

double parse_number(std::string_view text, std::string_view whole) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ContractError("malformed number in preset '" + std::string(whole) + "'");
  return v;
}

}  // namespace

WarpParams preset(std::string_view name) {
  if (name == "euclidean") return preset_euclidean();
  if (name == "dtw") return preset_dtw();
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = name.find(':', start);
    parts.push_back(name.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts[0] == "edit" && parts.size() == 2) return preset_edit(parse_number(parts[1], name));
  if (parts[0] == "edr" && parts.size() == 3)
    return preset_edr(parse_number(parts[1], name), parse_number(parts[2], name));
  throw ContractError("unknown preset '" + std::string(name) + "' (expected euclidean, dtw, edit:G or edr:G:E)");
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t t) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(t * (t - 1) / 2);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j) pairs.emplace_back(i, j);
  return pairs;
}

}  // namespace

DistanceMatrix pairwise_distances(const WarpParams& params, const TrajectoryDataset& ds) {
  params.validate();
  const std::size_t t = ds.size();
  DistanceMatrix dm{ds.ids(), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t))};
  if (t < 2) return dm;
  const auto pairs = upper_pairs(t);
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    out[k] = warp_distance(params, ds[pairs[k].first], ds[pairs[k].second]);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    dm.values(i, j) = dm.values(j, i) = out[k];
  }
  return dm;
}

PairTables::PairTables(const TrajectoryDataset& ds) : ids_(ds.ids()) {
  const std::size_t t = ds.size();
  const auto pairs = t >= 2 ? upper_pairs(t) : std::vector<std::pair<std::size_t, std::size_t>>{};
  tables_.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    tables_[k] = state_distances(ds[pairs[k].first], ds[pairs[k].second]);
  });
}

std::size_t PairTables::slot(std::size_t i, std::size_t j) const {
  const std::size_t t = ids_.size();
  // row-major index into the strict upper triangle
  return i * t - i * (i + 1) / 2 + (j - i - 1);
}

const Eigen::MatrixXd& PairTables::table(std::size_t i, std::size_t j) const {
  AUTOWARP_REQUIRE(i < j && j < ids_.size(), "PairTables::table expects i < j");
  return tables_[slot(i, j)];
}

DistanceMatrix PairTables::distances(const WarpParams& params) const {
  const auto costs = step_costs(params);
  const std::size_t t = ids_.size();
  DistanceMatrix dm{ids_, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t))};
  if (t < 2) return dm;
  const auto pairs = upper_pairs(t);
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) { out[k] = warp_recursion(costs, tables_[k]); });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    dm.values(i, j) = dm.values(j, i) = out[k];
  }
  return dm;
}

}  // namespace autowarp
