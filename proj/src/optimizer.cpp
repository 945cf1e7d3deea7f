#include "autowarp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autowarp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kResampleAttempts = 10;
}  // namespace

WarpParams ParamBox::project(const WarpParams& p) const {
  return {std::clamp(p.alpha, alpha_min, alpha_max), std::clamp(p.gamma, gamma_min, gamma_max),
          std::clamp(p.epsilon, epsilon_min, epsilon_max)};
}

bool ParamBox::contains(const WarpParams& p) const {
  return p.alpha >= alpha_min && p.alpha <= alpha_max && p.gamma >= gamma_min && p.gamma <= gamma_max &&
         p.epsilon >= epsilon_min && p.epsilon <= epsilon_max;
}

void OptimizerConfig::validate() const {
  AUTOWARP_REQUIRE(batch_size >= 1, "batch size must be >= 1");
  AUTOWARP_REQUIRE(learning_rate > 0.0, "learning rate must be > 0");
  AUTOWARP_REQUIRE(percentile > 0.0 && percentile <= 1.0, "percentile must lie in (0, 1]");
  AUTOWARP_REQUIRE(restarts >= 1, "need at least one restart");
  AUTOWARP_REQUIRE(box.alpha_min <= box.alpha_max && box.gamma_min <= box.gamma_max &&
                       box.epsilon_min <= box.epsilon_max,
                   "parameter box is empty");
  AUTOWARP_REQUIRE(box.alpha_min >= 0.0 && box.alpha_max < 1.0, "alpha box must lie in [0, 1)");
  AUTOWARP_REQUIRE(box.gamma_min >= 0.0, "gamma box must be non-negative");
  AUTOWARP_REQUIRE(box.epsilon_min > 0.0 && box.epsilon_max < 1.0, "epsilon box must lie in (0, 1)");
}

std::vector<IndexPair> close_pairs(const Eigen::MatrixXd& latent_dist, double delta) {
  std::vector<IndexPair> out;
  const auto t = static_cast<std::size_t>(latent_dist.rows());
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j)
      if (latent_dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= delta) out.emplace_back(i, j);
  return out;
}

PairBatches sample_batches(const std::vector<IndexPair>& close_set, std::size_t count, std::size_t batch_size,
                           Rng& rng) {
  if (close_set.empty()) throw DataError("no latent pair within the threshold; use a larger percentile");
  AUTOWARP_REQUIRE(count >= 2, "sampling needs at least two trajectories");
  PairBatches b;
  b.close.reserve(batch_size);
  b.all.reserve(batch_size);
  for (std::size_t k = 0; k < batch_size; ++k) b.close.push_back(close_set[rng.index(close_set.size())]);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const std::size_t i = rng.index(count);
    std::size_t j = rng.index(count - 1);
    if (j >= i) ++j;
    b.all.emplace_back(i, j);
  }
  return b;
}

PairBatches sample_batches(const LatentMatrix& latents, const ThresholdSpec& spec, std::size_t batch_size,
                           Rng& rng) {
  const Eigen::MatrixXd ld = latent_distances(latents);
  return sample_batches(close_pairs(ld, spec.resolve(ld)), latents.size(), batch_size, rng);
}

WarpParams gradient_step(const WarpParams& params, const Eigen::Vector3d& gradient, double rate,
                         const ParamBox& box) {
  return box.project({params.alpha - rate * gradient(0), params.gamma - rate * gradient(1),
                      params.epsilon - rate * gradient(2)});
}

namespace {

struct RestartRun {
  RestartSummary summary;
  std::vector<TraceRow> trace;
};

RestartRun run_restart(const TrajectoryDataset& ds, const std::vector<IndexPair>& close_set,
                       const OptimizerConfig& cfg, Rng rng) {
  RestartRun run;
  const double lo = 0.05, hi = 0.95;
  WarpParams p{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  p = cfg.box.project(p);
  run.summary.initial = p;

  std::size_t quiet = 0;
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    ValueGrad obj;
    bool ok = false;
    for (int attempt = 0; attempt < kResampleAttempts && !ok; ++attempt) {
      const PairBatches batch = sample_batches(close_set, ds.size(), cfg.batch_size, rng);
      try {
        obj = objective_grad(p, ds, batch.close, batch.all);
        ok = true;
      } catch (const DataError&) {
        if (attempt + 1 == kResampleAttempts)
          throw DataError(
              "every sampled batch has zero total distance; the trajectories appear identical. "
              "Check the input for duplicated trajectories or add variation.");
      }
    }
    run.trace.push_back({step, p, obj.value});
    if (!std::isfinite(obj.value) || !obj.gradient.allFinite()) {
      run.summary.aborted = true;
      run.summary.note = "non-finite gradient at step " + std::to_string(step);
      break;
    }
    const WarpParams next = gradient_step(p, obj.gradient, cfg.learning_rate, cfg.box);
    const double change = std::max({std::abs(next.alpha - p.alpha), std::abs(next.gamma - p.gamma),
                                    std::abs(next.epsilon - p.epsilon)});
    p = next;
    run.summary.steps = step + 1;
    quiet = change < cfg.convergence_tol ? quiet + 1 : 0;
    if (quiet >= cfg.convergence_window) {
      run.summary.converged = true;
      break;
    }
  }
  run.summary.final = p;
  return run;
}

}  // namespace

LearnResult learn(const TrajectoryDataset& ds, const LatentMatrix& latents, const OptimizerConfig& cfg) {
  cfg.validate();
  AUTOWARP_REQUIRE(ds.size() >= 2, "learn needs at least two trajectories");
  AUTOWARP_REQUIRE(latents.ids == ds.ids(), "latents are not aligned with the dataset");
  latents.validate();

  const Eigen::MatrixXd ld = latent_distances(latents);
  const ThresholdSpec spec = ThresholdSpec::at_percentile(cfg.percentile);
  const double delta = spec.resolve(ld);
  const auto close_set = close_pairs(ld, delta);
  const PairTables tables(ds);
  const Rng root = Rng(cfg.seed).substream("optimizer");

  LearnResult result;
  result.betacv = kNaN;
  bool have_best = false;
  std::vector<RestartRun> runs;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RestartRun run = run_restart(ds, close_set, cfg, root.substream(r));
    run.summary.betacv = kNaN;
    if (!run.summary.aborted) {
      const DistanceMatrix dm = tables.distances(run.summary.final);
      run.summary.betacv = latent_betacv(dm, latents, ThresholdSpec::at_delta(delta));
      if (!have_best || run.summary.betacv < result.betacv) {
        have_best = true;
        result.betacv = run.summary.betacv;
        result.params = run.summary.final;
        result.restart_index = r;
      }
    }
    runs.push_back(std::move(run));
  }
  if (!have_best) throw DataError("every restart aborted with non-finite gradients");
  for (auto& run : runs) result.restarts.push_back(run.summary);
  result.trace = std::move(runs[result.restart_index].trace);
  return result;
}

std::vector<double> GridSpec::linspace(double lo, double hi, std::size_t count) {
  AUTOWARP_REQUIRE(count >= 1, "linspace needs count >= 1");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t k = 0; k < count; ++k)
    v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  v.back() = hi;
  return v;
}

LatentMatrix flattened_states(const TrajectoryDataset& ds) {
  AUTOWARP_REQUIRE(ds.equal_lengths(), "raw control requires equal-length trajectories");
  const Eigen::Index width = ds[0].length() * ds.dim();
  LatentMatrix lm{ds.ids(), Eigen::MatrixXd(static_cast<Eigen::Index>(ds.size()), width)};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Eigen::MatrixXd& s = ds[i].states;
    for (Eigen::Index r = 0; r < s.rows(); ++r)
      lm.vectors.block(static_cast<Eigen::Index>(i), r * s.cols(), 1, s.cols()) = s.row(r);
  }
  return lm;
}

std::string to_string(ScanMode mode) {
  switch (mode) {
    case ScanMode::latent: return "latent";
    case ScanMode::labeled: return "labeled";
    case ScanMode::raw_control: return "raw_control";
  }
  return "latent";
}

GridResult grid_scan(const TrajectoryDataset& ds, const GridSpec& grid, ScanMode mode, const LatentMatrix* latents,
                     double percentile) {
  AUTOWARP_REQUIRE(!grid.alphas.empty() && !grid.gammas.empty(), "grid must be non-empty");
  LatentMatrix proxy;
  const LatentMatrix* reference = nullptr;
  switch (mode) {
    case ScanMode::labeled:
      AUTOWARP_REQUIRE(ds.has_labels(), "labeled scan requires labels");
      break;
    case ScanMode::latent:
      AUTOWARP_REQUIRE(latents != nullptr, "latent scan requires latents");
      AUTOWARP_REQUIRE(latents->ids == ds.ids(), "latents are not aligned with the dataset");
      reference = latents;
      break;
    case ScanMode::raw_control:
      proxy = flattened_states(ds);
      reference = &proxy;
      break;
  }
  const ThresholdSpec spec = ThresholdSpec::at_percentile(percentile);

  const PairTables tables(ds);
  GridResult result;
  result.mode = mode;
  for (double a : grid.alphas) {
    for (double g : grid.gammas) {
      const WarpParams p{a, g, grid.epsilon};
      const DistanceMatrix dm = tables.distances(p);
      double b = kNaN;
      if (dm.values.allFinite() && dm.values.sum() > 0.0) {
        b = mode == ScanMode::labeled ? betacv_labeled(dm, ds.labels()) : latent_betacv(dm, *reference, spec);
      }
      result.points.push_back({p, b});
      if (!std::isnan(b) && (!result.best || b < result.best->betacv)) result.best = GridPoint{p, b};
    }
  }
  return result;
}

}  // namespace autowarp
