#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "autowarp/analysis.hpp"
#include "autowarp/betacv.hpp"
#include "autowarp/grad.hpp"
#include "autowarp/latent.hpp"
#include "autowarp/optimizer.hpp"
#include "autowarp/synth.hpp"
#include "autowarp/warp.hpp"

#ifndef AUTOWARP_CLI
#error "AUTOWARP_CLI must name the command-line binary"
#endif

using namespace autowarp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

Trajectory random_traj(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd s(n, d);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
  return {"t", s};
}

TrajectoryDataset synth_set(NoiseKind noise, std::uint64_t seed, std::size_t copies = 10) {
  SynthSpec spec;
  spec.noise = noise;
  spec.seed = seed;
  spec.copies = copies;
  return normalize_dataset(generate(spec));
}

// Trained latents are shared between criteria 4, 5 and 6.
struct Regime {
  std::string name;
  TrajectoryDataset ds;
  LatentMatrix latents;
};

Regime make_regime(const std::string& name, const SynthSpec& spec) {
  Regime r{name, normalize_dataset(generate(spec)), {}};
  const std::uint64_t seed = spec.seed;
  AutoencoderConfig cfg;
  cfg.seed = seed;
  r.latents = encode_dataset(train_autoencoder(r.ds, cfg).model, r.ds);
  return r;
}

const GridSpec kGrid{GridSpec::linspace(0.0, 1.0, 11), GridSpec::linspace(0.0, 1.0, 11), 0.99};
constexpr double kStep = 0.1;

bool within_one_step(const WarpParams& a, const WarpParams& b) {
  return std::abs(a.alpha - b.alpha) <= kStep + 1e-9 && std::abs(a.gamma - b.gamma) <= kStep + 1e-9;
}

std::string at(const WarpParams& p) { return "(" + fmt(p.alpha, 3) + "," + fmt(p.gamma, 3) + ")"; }

// 1 ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  const int draws = 250;
  for (int k = 0; k < draws; ++k) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(8));
    const auto m = static_cast<Eigen::Index>(1 + rng.index(static_cast<std::uint64_t>(12 - n)));
    const auto d = static_cast<Eigen::Index>(1 + rng.index(3));
    const auto a = random_traj(rng, n, d);
    const auto b = random_traj(rng, m, d);
    const WarpParams p{rng.uniform(0.0, 0.95), rng.uniform(0.0, 1.5), rng.uniform(0.05, 0.95)};
    worst = std::max(worst, std::abs(warp_distance(p, a, b) - oracle_distance(p, a, b).first));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 60.0,
          std::to_string(draws) + " draws, max |DP - oracle| = " + fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome preset_reproduction() {
  bool ok = preset_euclidean() == WarpParams{1, 0, 1} && preset_dtw() == WarpParams{0.5, 0, 1} &&
            preset_edit(0.4) == WarpParams{0, 0.4, 1} && preset_edr(0.4, 0.5) == WarpParams{0, 0.4, 0.5} &&
            preset("edr:0.3:0.2") == WarpParams{0, 0.3, 0.2};
  Rng rng(202);
  bool inf_ok = true;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(20));
    const auto a = random_traj(rng, n, 2);
    const auto b = random_traj(rng, n, 2);
    const auto c = random_traj(rng, n + 1 + static_cast<Eigen::Index>(rng.index(5)), 2);
    inf_ok = inf_ok && warp_distance(preset_euclidean(), a, c) == kInf;
    const double diag = (a.states - b.states).rowwise().norm().sum();
    worst = std::max(worst, std::abs(warp_distance(preset_euclidean(), a, b) - diag));
  }
  ok = ok && inf_ok && worst < 1e-9;
  return {ok, std::string("preset map exact; unequal lengths ") + (inf_ok ? "+inf" : "NOT +inf") +
                  "; equal-length max |d - sum|a_k-b_k|| = " + fmt(worst)};
}

// 3 ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  Rng rng(303);
  const double h = 1e-4;
  int checked = 0;
  double worst = 0.0;
  auto shift = [](WarpParams p, int k, double d) {
    (k == 0 ? p.alpha : k == 1 ? p.gamma : p.epsilon) += d;
    return p;
  };
  while (checked < 60) {
    const auto a = random_traj(rng, 2 + static_cast<Eigen::Index>(rng.index(12)), 2);
    const auto b = random_traj(rng, 2 + static_cast<Eigen::Index>(rng.index(12)), 2);
    const WarpParams p{rng.uniform(0.05, 0.9), rng.uniform(0.0, 1.0), rng.uniform(0.05, 0.95)};
    const auto path = warp_alignment(p, a, b).second.steps;
    bool stable = true;
    for (int k = 0; k < 3 && stable; ++k)
      stable = warp_alignment(shift(p, k, h), a, b).second.steps == path &&
               warp_alignment(shift(p, k, -h), a, b).second.steps == path;
    if (!stable) continue;
    const auto g = warp_distance_grad(p, a, b);
    for (int k = 0; k < 3; ++k) {
      const double fd = (warp_distance(shift(p, k, h), a, b) - warp_distance(shift(p, k, -h), a, b)) / (2 * h);
      worst = std::max(worst, std::abs(g.gradient(k) - fd) / std::max(1.0, std::max(std::abs(fd), std::abs(g.gradient(k)))));
    }
    ++checked;
  }

  Rng lrng(304);
  const auto model = AutoencoderModel::initialized(2, 3, lrng);
  const Eigen::MatrixXd x = random_traj(lrng, 4, 2).states;
  AutoencoderModel grad = model.zeros_like();
  loss_and_gradient(model, x, grad);
  double lstm_worst = 0.0;
  const double lh = 1e-5;
  for (int k = 0; k < 40; ++k) {
    const auto c = static_cast<Eigen::Index>(lrng.index(model.parameter_count()));
    AutoencoderModel plus = model, minus = model;
    plus.parameters()(c) += lh;
    minus.parameters()(c) -= lh;
    const double fd = (reconstruction_loss(plus, x) - reconstruction_loss(minus, x)) / (2 * lh);
    const double an = grad.parameters()(c);
    lstm_worst = std::max(lstm_worst, std::abs(fd - an) / std::max(1e-3, std::max(std::abs(fd), std::abs(an))));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && lstm_worst < 1e-4 && secs < 120.0,
          std::to_string(checked) + " warp checks max rel err " + fmt(worst) + "; LSTM 40 coords max rel err " +
              fmt(lstm_worst) + "; " + fmt(secs, 3) + " s"};
}

// 4 ---------------------------------------------------------------------------

Outcome argmin_recovery(const std::vector<Regime>& regimes, double setup_secs) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& r : regimes) {
    const auto lab = grid_scan(r.ds, kGrid, ScanMode::labeled);
    const auto lat = grid_scan(r.ds, kGrid, ScanMode::latent, &r.latents, 0.2);
    if (!lab.best || !lat.best) return {false, r.name + ": empty grid"};
    const WarpParams b = lab.best->params;
    bool target = false;
    if (r.name == "gaussian") target = b.alpha == 1.0 && b.gamma == 0.0;
    if (r.name == "resample") target = within_one_step(b, {0.5, 0.0, 0.99});
    if (r.name == "outliers") target = b.alpha <= 0.1 && b.gamma >= 0.2 - 1e-12 && b.gamma <= 0.6 + 1e-12;
    const bool close = within_one_step(lat.best->params, b);
    ok = ok && target && close;
    detail += r.name + " labeled " + at(b) + (target ? "" : " [off target]") + " latent " + at(lat.best->params) +
              (close ? "" : " [>1 step]") + "; ";
  }
  const double secs = seconds_since(t0) + setup_secs;
  ok = ok && secs < 900.0;
  return {ok, detail + fmt(secs, 4) + " s incl. autoencoder training"};
}

// 5 ---------------------------------------------------------------------------

Outcome learn_end_to_end(const Regime& gaussian) {
  const auto t0 = Clock::now();
  OptimizerConfig cfg;
  cfg.seed = 1;
  const auto r = learn(gaussian.ds, gaussian.latents, cfg);
  GridSpec fine = kGrid;
  fine.alphas = GridSpec::linspace(0.0, 0.99, 12);
  const auto grid = grid_scan(gaussian.ds, fine, ScanMode::latent, &gaussian.latents, cfg.percentile);
  const double gmin = grid.best->betacv;
  const double secs = seconds_since(t0);
  const bool a_ok = r.params.alpha >= 0.8, g_ok = r.params.gamma <= 0.1, b_ok = r.betacv <= 1.05 * gmin;
  return {a_ok && g_ok && b_ok && secs < 600.0,
          "learned (" + fmt(r.params.alpha) + ", " + fmt(r.params.gamma) + ", " + fmt(r.params.epsilon) +
              ") alpha>=0.8 " + (a_ok ? "ok" : "FAIL") + ", gamma<=0.1 " + (g_ok ? "ok" : "FAIL") +
              ", latent betaCV " + fmt(r.betacv, 6) + " vs grid min " + fmt(gmin, 6) + " " + (b_ok ? "ok" : "FAIL") +
              "; " + fmt(secs, 3) + " s"};
}

// 6 ---------------------------------------------------------------------------

double correlation(const Regime& regime) {
  Rng rng = Rng(606).substream("scan");
  auto distances = random_params(42, rng);
  for (const auto& p : preset_params()) distances.push_back(p);
  for (std::uint64_t s = 0; s < 4; ++s) {
    OptimizerConfig cfg;
    cfg.seed = 1 + s;
    distances.push_back({"learned_" + std::to_string(s), learn(regime.ds, regime.latents, cfg).params});
  }
  return scan_distances(regime.ds, regime.latents, distances, 0.2, 7).spearman;
}

Outcome betacv_accuracy_correlation(const std::vector<Regime>& regimes) {
  const auto t0 = Clock::now();
  std::vector<double> rho;
  for (const auto& r : regimes) rho.push_back(correlation(r));
  std::string detail = "50 distances (42 random, 4 presets, 4 learned); Spearman";
  for (std::size_t i = 0; i < regimes.size(); ++i) detail += " " + regimes[i].name + " " + fmt(rho[i]);
  return {rho[0] <= -0.5, detail + " (gated on " + regimes[0].name + "); " + fmt(seconds_since(t0), 3) + " s"};
}

// 7 ---------------------------------------------------------------------------

Outcome label_noise_robustness() {
  const auto ds = synth_set(NoiseKind::gaussian, 7, 40);
  const auto full = pairwise_distances(preset_dtw(), ds);
  std::vector<Eigen::Index> keep;
  std::vector<int> sub_labels;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (i % 40 < 10) {
      keep.push_back(static_cast<Eigen::Index>(i));
      sub_labels.push_back(ds.labels()[i]);
    }
  DistanceMatrix sub;
  for (auto i : keep) sub.ids.push_back(full.ids[static_cast<std::size_t>(i)]);
  sub.values = full.values(keep, keep);

  std::string detail;
  bool ok = true;
  std::vector<double> means;
  using Case = std::pair<const DistanceMatrix*, const std::vector<int>*>;
  for (const auto& [dm, labels] : {Case{&sub, &sub_labels}, Case{&full, &ds.labels()}}) {
    const auto zero = label_noise_experiment(*dm, *labels, 0.0, 200, Rng(70));
    const auto r = label_noise_experiment(*dm, *labels, 0.1, 200, Rng(71));
    const double bound = r.K * 0.1 + 5.0 * r.std_err;
    ok = ok && zero.max_dev == 0.0 && r.max_dev <= bound;
    means.push_back(r.mean_dev);
    detail += "T=" + std::to_string(dm->size()) + ": p=0 max " + fmt(zero.max_dev) + ", p=0.1 mean " +
              fmt(r.mean_dev) + " max " + fmt(r.max_dev) + " (K*p+5SE " + fmt(bound) + "); ";
  }
  const bool shrinks = means[1] < means[0];
  return {ok && shrinks, detail + (shrinks ? "mean decreases with T" : "mean does NOT decrease with T")};
}

// 8 ---------------------------------------------------------------------------

Outcome betacv_algebra() {
  const auto ds = synth_set(NoiseKind::gaussian, 8);
  const auto dm = pairwise_distances({0.6, 0.2, 0.8}, ds);
  const double b = betacv_labeled(dm, ds.labels());
  bool scale = true;
  Rng rng(808);
  std::vector<double> factors{0.001, 0.5, 3.0, 1e6};
  for (int k = 0; k < 200; ++k) factors.push_back(std::exp(rng.uniform(-20.0, 20.0)));
  for (double c : factors) {
    DistanceMatrix s = dm;
    s.values *= c;
    scale = scale && betacv_labeled(s, ds.labels()) == b;
  }
  DistanceMatrix equal = dm;
  equal.values.setConstant(2.5);
  const double eq = betacv_labeled(equal, ds.labels());
  LatentMatrix same{ds.ids(), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.size()), 3)};
  const double eq_lat = latent_betacv(dm, same, ThresholdSpec::at_percentile(0.2));
  LatentMatrix oracle = same;
  for (std::size_t i = 0; i < ds.size(); ++i) oracle.vectors(static_cast<Eigen::Index>(i), 0) = ds.labels()[i];
  const double lb = latent_betacv(dm, oracle, ThresholdSpec::at_delta(0.5));
  const bool bitwise = lb == b;
  return {scale && eq == 1.0 && eq_lat == 1.0 && bitwise,
          "scale (" + std::to_string(factors.size()) + " factors) " + (scale ? "exact" : "NOT exact") + "; equal distances " + fmt(eq, 17) +
              "; identical latents " + fmt(eq_lat, 17) + "; oracle latents " + (bitwise ? "bit-identical" : "differ")};
}

// 9 ---------------------------------------------------------------------------

double median_time(const std::function<void()>& f, int reps) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome complexity() {
  Rng rng(909);
  const WarpParams p{0.4, 0.3, 0.6};
  const auto a1 = random_traj(rng, 400, 2), b1 = random_traj(rng, 400, 2);
  const auto a2 = random_traj(rng, 800, 2), b2 = random_traj(rng, 800, 2);
  volatile double sink = 0.0;
  const double t1 = median_time([&] { sink = sink + warp_distance(p, a1, b1); }, 15);
  const double t2 = median_time([&] { sink = sink + warp_distance(p, a2, b2); }, 15);
  const double ratio = t2 / t1;

  const auto ds = synth_set(NoiseKind::gaussian, 9);
  LatentMatrix lat{ds.ids(), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.size()), 1)};
  for (std::size_t i = 0; i < ds.size(); ++i) lat.vectors(static_cast<Eigen::Index>(i), 0) = ds.labels()[i];
  Rng brng(910);
  const double step = median_time(
      [&] {
        const auto batch = sample_batches(lat, ThresholdSpec::at_percentile(0.2), 64, brng);
        const auto g = objective_grad(p, ds, batch.close, batch.all);
        sink = sink + gradient_step(p, g.gradient, 0.05, ParamBox{}).alpha;
      },
      5);
  return {ratio >= 2.8 && ratio <= 5.2 && step < 1.0,
          "length 400->800 time ratio " + fmt(ratio, 3) + " (4 +- 30%); optimizer step S=64 N=30 " + fmt(step * 1e3, 3) +
              " ms"};
}

// 10 --------------------------------------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  return std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {});
}

Outcome cli_determinism() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "autowarp_acceptance_cli";
  fs::remove_all(root);
  const std::string cli = AUTOWARP_CLI;
  const std::vector<std::string> files{"data.csv",  "labels.csv", "latents.csv", "model.json", "loss.csv",
                                       "params.json", "trace.csv",  "dist.csv",    "knn.json",   "compact.csv",
                                       "noise.json",  "mds.csv",    "clusters.csv", "grid.csv",  "scan.csv"};
  for (const std::string run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    const std::string d = dir.string() + "/";
    const std::string threads = run == "a" ? "--threads 1 " : "--threads 4 ";
    const std::vector<std::string> cmds{
        "synth --noise gaussian --seed 3 -o " + d + "data.csv --labels " + d + "labels.csv",
        "encode --input " + d + "data.csv --seed 3 -o " + d + "latents.csv --checkpoint " + d + "model.json --loss " +
            d + "loss.csv",
        "learn --input " + d + "data.csv --latents " + d + "latents.csv --seed 3 -o " + d + "params.json --trace " + d +
            "trace.csv",
        "dist --input " + d + "data.csv --params " + d + "params.json -o " + d + "dist.csv",
        "eval knn --dist " + d + "dist.csv --labels " + d + "labels.csv -k 7 -o " + d + "knn.json",
        "eval compactness --dist " + d + "dist.csv --k-max 10 -o " + d + "compact.csv",
        "eval noise --dist " + d + "dist.csv --labels " + d + "labels.csv -p 0.1 --seed 3 -o " + d + "noise.json",
        "embed mds --dist " + d + "dist.csv --labels " + d + "labels.csv -o " + d + "mds.csv",
        "cluster spectral --dist " + d + "dist.csv -k 5 --seed 3 -o " + d + "clusters.csv",
        "scan grid --input " + d + "data.csv --mode latent --latents " + d + "latents.csv -o " + d + "grid.csv",
        "scan random --input " + d + "data.csv --labels " + d + "labels.csv --latents " + d + "latents.csv --learned " +
            d + "params.json --seed 3 -o " + d + "scan.csv",
    };
    for (const auto& c : cmds) {
      const std::string full = cli + " " + threads + c + " > " + d + "stdout.txt 2> " + d + "stderr.txt";
      if (std::system(full.c_str()) != 0) return {false, "command failed: autowarp " + c};
    }
  }
  std::vector<std::string> differing;
  for (const auto& f : files)
    if (!same_bytes(root / "a" / f, root / "b" / f)) differing.push_back(f);
  fs::remove_all(root);
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(files.size()) + " artifacts from 11 subcommands, --threads 1 vs 4: ";
  if (differing.empty()) detail += "byte-identical";
  for (const auto& f : differing) detail += f + " differs; ";
  return {differing.empty(), detail + "; " + fmt(secs, 4) + " s"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "oracle equivalence", guarded(oracle_equivalence));
  report(2, "preset reproduction", guarded(preset_reproduction));
  report(3, "gradient correctness", guarded(gradient_correctness));

  const auto t0 = Clock::now();
  std::vector<Regime> regimes;
  try {
    SynthSpec spec;
    spec.seed = 1;
    spec.noise = NoiseKind::gaussian;
    regimes.push_back(make_regime("gaussian", spec));
    spec.noise = NoiseKind::resample;
    regimes.push_back(make_regime("resample", spec));
    spec.noise = NoiseKind::hybrid_gaussian_outliers;
    regimes.push_back(make_regime("outliers", spec));
    spec.seeds = 15;
    spec.noise = NoiseKind::hybrid_gaussian_resample;
    spec.gaussian_sigma = 0.3;
    regimes.push_back(make_regime("15-class", spec));
  } catch (const std::exception& e) {
    std::cout << "setup error: " << e.what() << std::endl;
  }
  const double setup = seconds_since(t0);
  const bool have = regimes.size() == 4;
  report(4, "argmin recovery", have ? guarded([&] { return argmin_recovery({regimes[0], regimes[1], regimes[2]}, setup); })
                                    : Outcome{false, "autoencoder setup failed"});
  report(5, "learning end-to-end", have ? guarded([&] { return learn_end_to_end(regimes[0]); })
                                           : Outcome{false, "autoencoder setup failed"});
  report(6, "betaCV vs k-NN accuracy", have ? guarded([&] { return betacv_accuracy_correlation({regimes[3], regimes[0], regimes[1], regimes[2]}); })
                                            : Outcome{false, "autoencoder setup failed"});
  report(7, "label-noise robustness", guarded(label_noise_robustness));
  report(8, "betaCV algebra", guarded(betacv_algebra));
  report(9, "complexity spot-check", guarded(complexity));
  report(10, "CLI determinism", guarded(cli_determinism));
  std::cout << (10 - failures) << "/10 acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
