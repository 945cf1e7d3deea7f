#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autowarp/analysis.hpp"
#include "autowarp/betacv.hpp"
#include "autowarp/io.hpp"
#include "autowarp/latent.hpp"
#include "autowarp/optimizer.hpp"
#include "autowarp/parallel.hpp"
#include "autowarp/synth.hpp"
#include "autowarp/warp.hpp"

namespace aw = autowarp;
using aw::io::format_double;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

aw::TrajectoryDataset load_dataset(const std::string& path, const std::string& labels, bool raw) {
  aw::TrajectoryDataset ds = aw::io::read_trajectories(path);
  if (!labels.empty()) ds = aw::io::attach_labels(ds, aw::io::read_labels(labels), labels);
  return raw ? ds : aw::normalize_dataset(ds);
}

std::vector<int> labels_for(const std::vector<std::string>& ids, const std::string& path) {
  const auto map = aw::io::read_labels(path);
  std::vector<int> out;
  for (const auto& id : ids) {
    const auto it = map.find(id);
    if (it == map.end()) throw aw::DataError(path + ": no label for trajectory '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

double percent(int p) {
  if (p < 1 || p > 100) throw UsageError("--percentile must be an integer in [1, 100]");
  return p / 100.0;
}

// synth ------------------------------------------------------------------

struct SynthOpts {
  aw::SynthSpec spec;
  std::string noise = "gaussian";
  std::string output, labels;
};

void run_synth(const SynthOpts& o) {
  aw::SynthSpec spec = o.spec;
  spec.noise = aw::parse_noise_kind(o.noise);
  const aw::TrajectoryDataset ds = aw::generate(spec);
  aw::io::write_trajectories(o.output, ds);
  if (!o.labels.empty()) aw::io::write_labels(o.labels, ds);
}

// encode -----------------------------------------------------------------

struct EncodeOpts {
  std::string input, output, checkpoint, loss;
  aw::AutoencoderConfig cfg;
  bool raw = false;
};

void run_encode(const EncodeOpts& o) {
  const auto ds = load_dataset(o.input, "", o.raw);
  const auto trained = aw::train_autoencoder(ds, o.cfg);
  aw::io::write_latents(o.output, aw::encode_dataset(trained.model, ds));
  if (!o.checkpoint.empty()) aw::save_checkpoint(o.checkpoint, trained.model);
  if (!o.loss.empty()) {
    std::ostringstream s;
    s << "epoch,loss\n";
    for (std::size_t e = 0; e < trained.loss_curve.size(); ++e)
      s << e << ',' << format_double(trained.loss_curve[e]) << '\n';
    aw::io::write_text(o.loss, s.str());
  }
}

// learn ------------------------------------------------------------------

struct LearnOpts {
  std::string input, latents, output, trace;
  aw::OptimizerConfig cfg;
  int percentile = 20;
  bool raw = false;
};

void run_learn(const LearnOpts& o) {
  const auto ds = load_dataset(o.input, "", o.raw);
  const auto latents = aw::load_latents(o.latents, ds.ids());
  aw::OptimizerConfig cfg = o.cfg;
  cfg.percentile = percent(o.percentile);
  const auto result = aw::learn(ds, latents, cfg);
  aw::io::write_params(o.output, result.params, result.betacv);
  if (!o.trace.empty()) {
    std::ostringstream s;
    s << "step,alpha,gamma,epsilon,batch_betacv\n";
    for (const auto& row : result.trace)
      s << row.step << ',' << format_double(row.params.alpha) << ',' << format_double(row.params.gamma) << ','
        << format_double(row.params.epsilon) << ',' << format_double(row.batch_betacv) << '\n';
    aw::io::write_text(o.trace, s.str());
  }
  for (std::size_t r = 0; r < result.restarts.size(); ++r) {
    const auto& s = result.restarts[r];
    std::cerr << "restart " << r << ": alpha=" << format_double(s.final.alpha)
              << " gamma=" << format_double(s.final.gamma) << " epsilon=" << format_double(s.final.epsilon)
              << " betacv=" << format_double(s.betacv) << " steps=" << s.steps
              << (s.converged ? " converged" : "") << (s.aborted ? " aborted: " + s.note : "") << '\n';
  }
}

// dist -------------------------------------------------------------------

struct DistOpts {
  std::string input, params, preset, output;
  bool raw = false;
};

void run_dist(const DistOpts& o) {
  if (o.params.empty() == o.preset.empty()) throw UsageError("dist needs exactly one of --params or --preset");
  const auto ds = load_dataset(o.input, "", o.raw);
  const aw::WarpParams p = o.params.empty() ? aw::preset(o.preset) : aw::io::read_params(o.params).params;
  aw::io::write_distance_matrix(o.output, aw::pairwise_distances(p, ds));
}

// scan -------------------------------------------------------------------

struct GridOpts {
  std::string input, labels, latents, output, mode = "labeled";
  std::size_t alpha_steps = 11, gamma_steps = 11;
  double alpha_max = 1.0, gamma_max = 1.0, epsilon = 0.99;
  int percentile = 20;
  bool raw = false;
};

void run_scan_grid(const GridOpts& o) {
  aw::ScanMode mode;
  if (o.mode == "labeled") mode = aw::ScanMode::labeled;
  else if (o.mode == "latent") mode = aw::ScanMode::latent;
  else if (o.mode == "raw") mode = aw::ScanMode::raw_control;
  else throw UsageError("--mode must be labeled, latent, or raw");
  if (mode == aw::ScanMode::labeled && o.labels.empty()) throw UsageError("labeled scan needs --labels");
  if (mode == aw::ScanMode::latent && o.latents.empty()) throw UsageError("latent scan needs --latents");

  const auto ds = load_dataset(o.input, o.labels, o.raw);
  aw::LatentMatrix latents;
  if (mode == aw::ScanMode::latent) latents = aw::load_latents(o.latents, ds.ids());
  const aw::GridSpec grid{aw::GridSpec::linspace(0.0, o.alpha_max, o.alpha_steps),
                          aw::GridSpec::linspace(0.0, o.gamma_max, o.gamma_steps), o.epsilon};
  const auto result = aw::grid_scan(ds, grid, mode, &latents, percent(o.percentile));

  std::ostringstream s;
  s << "alpha,gamma,epsilon,mode,betacv\n";
  for (const auto& pt : result.points)
    s << format_double(pt.params.alpha) << ',' << format_double(pt.params.gamma) << ','
      << format_double(pt.params.epsilon) << ',' << aw::to_string(mode) << ','
      << (std::isnan(pt.betacv) ? std::string("nan") : format_double(pt.betacv)) << '\n';
  aw::io::write_text(o.output, s.str());
  if (result.best)
    std::cout << "argmin alpha=" << format_double(result.best->params.alpha)
              << " gamma=" << format_double(result.best->params.gamma)
              << " betacv=" << format_double(result.best->betacv) << '\n';
}

struct RandomScanOpts {
  std::string input, labels, latents, output, summary;
  std::vector<std::string> learned;
  std::size_t count = 42, k = 7;
  double gamma0 = 0.5, epsilon0 = 0.5;
  int percentile = 20;
  std::uint64_t seed = 0;
  bool raw = false;
};

void run_scan_random(const RandomScanOpts& o) {
  const auto ds = load_dataset(o.input, o.labels, o.raw);
  const auto latents = aw::load_latents(o.latents, ds.ids());
  aw::Rng rng = aw::Rng(o.seed).substream("scan");
  auto distances = aw::random_params(o.count, rng);
  for (auto& p : aw::preset_params(o.gamma0, o.epsilon0)) distances.push_back(p);
  for (std::size_t i = 0; i < o.learned.size(); ++i)
    distances.push_back({"learned_" + std::to_string(i), aw::io::read_params(o.learned[i]).params});
  const auto table = aw::scan_distances(ds, latents, distances, percent(o.percentile), o.k);

  std::ostringstream s;
  s << "name,alpha,gamma,epsilon,betacv,knn_accuracy\n";
  for (const auto& r : table.rows)
    s << r.name << ',' << format_double(r.params.alpha) << ',' << format_double(r.params.gamma) << ','
      << format_double(r.params.epsilon) << ',' << (std::isnan(r.betacv) ? std::string("nan") : format_double(r.betacv))
      << ',' << format_double(r.accuracy) << '\n';
  aw::io::write_text(o.output, s.str());
  std::cout << "spearman=" << format_double(table.spearman) << '\n';
  if (!o.summary.empty()) {
    nlohmann::ordered_json j;
    j["distances"] = table.rows.size();
    j["k"] = o.k;
    j["spearman"] = table.spearman;
    aw::io::write_text(o.summary, j.dump(2) + "\n");
  }
}

// eval / embed / cluster -------------------------------------------------

struct EvalOpts {
  std::string dist, labels, output;
  std::size_t k = 7, k_max = 10, trials = 200;
  double p = 0.1;
  std::uint64_t seed = 0;
};

void run_eval_knn(const EvalOpts& o) {
  const auto dm = aw::io::read_distance_matrix(o.dist);
  const double acc = aw::knn_accuracy(dm, labels_for(dm.ids, o.labels), o.k);
  nlohmann::ordered_json j;
  j["k"] = o.k;
  j["accuracy"] = acc;
  aw::io::write_text(o.output, j.dump(2) + "\n");
}

void run_eval_compactness(const EvalOpts& o) {
  const auto dm = aw::io::read_distance_matrix(o.dist);
  std::ostringstream s;
  s << "k,normalized_distance\n";
  for (const auto& pt : aw::compactness_curve(dm, o.k_max)) s << pt.k << ',' << format_double(pt.value) << '\n';
  aw::io::write_text(o.output, s.str());
}

void run_eval_noise(const EvalOpts& o) {
  const auto dm = aw::io::read_distance_matrix(o.dist);
  const auto report =
      aw::label_noise_experiment(dm, labels_for(dm.ids, o.labels), o.p, o.trials, aw::Rng(o.seed).substream("noise"));
  aw::io::write_text(o.output, aw::io::noise_report_json(report));
}

struct EmbedOpts {
  std::string dist, labels, output;
  std::size_t k = 2;
};

void run_embed_mds(const EmbedOpts& o) {
  const auto dm = aw::io::read_distance_matrix(o.dist);
  const Eigen::MatrixXd xy = aw::mds_embed(dm, o.k);
  std::vector<int> labels;
  if (!o.labels.empty()) labels = labels_for(dm.ids, o.labels);
  static const char* axes[] = {"x", "y", "z"};
  std::ostringstream s;
  s << "traj_id";
  for (std::size_t c = 0; c < o.k; ++c) s << ',' << (c < 3 ? std::string(axes[c]) : "x" + std::to_string(c));
  if (!labels.empty()) s << ",label";
  s << '\n';
  for (std::size_t i = 0; i < dm.size(); ++i) {
    s << dm.ids[i];
    for (Eigen::Index c = 0; c < xy.cols(); ++c) s << ',' << format_double(xy(static_cast<Eigen::Index>(i), c));
    if (!labels.empty()) s << ',' << labels[i];
    s << '\n';
  }
  aw::io::write_text(o.output, s.str());
}

struct ClusterOpts {
  std::string dist, output;
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

void run_cluster_spectral(const ClusterOpts& o) {
  const auto dm = aw::io::read_distance_matrix(o.dist);
  const auto c = aw::spectral_cluster(dm, o.k, aw::Rng(o.seed).substream("spectral"));
  if (c.degenerate) std::cerr << "warning: all trajectories are identical; returning a single cluster\n";
  std::ostringstream s;
  s << "traj_id,cluster\n";
  for (std::size_t i = 0; i < c.ids.size(); ++i) s << c.ids[i] << ',' << c.clusters[i] << '\n';
  aw::io::write_text(o.output, s.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autowarp: learn warping distances for trajectory data from unlabeled examples"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Maximum worker threads (outputs do not depend on this)")
      ->check(CLI::PositiveNumber);

  std::function<void()> action;
  auto no_norm = [](CLI::App* sub, bool& raw) {
    sub->add_flag("--raw", raw, "Skip per-dimension z-score normalization of the input");
  };

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic trajectory set");
  synth->add_option("--seeds", so.spec.seeds, "Number of seed random walks (classes)");
  synth->add_option("--copies", so.spec.copies, "Noisy copies per seed");
  synth->add_option("--length", so.spec.length, "States per trajectory");
  synth->add_option("--dim", so.spec.dim, "State dimension");
  synth->add_option("--noise", so.noise, "none|gaussian|outliers|resample|hybrid_gaussian_outliers|hybrid_gaussian_resample");
  synth->add_option("--sigma", so.spec.gaussian_sigma, "Gaussian noise standard deviation");
  synth->add_option("--outlier-rate", so.spec.outlier_rate, "Per-state outlier probability");
  synth->add_option("--outlier-magnitude", so.spec.outlier_magnitude, "Outlier displacement length");
  synth->add_option("--keep", so.spec.keep_fraction, "Per-state keep probability for resampling");
  synth->add_option("--walk-step", so.spec.walk_step, "Random-walk increment standard deviation");
  synth->add_option("--seed", so.spec.seed, "Master seed");
  synth->add_option("-o,--output", so.output, "Trajectory CSV to write")->required();
  synth->add_option("--labels", so.labels, "Labels CSV to write");
  synth->callback([&] { action = [&] { run_synth(so); }; });

  EncodeOpts eo;
  auto* encode = app.add_subcommand("encode", "Train the sequence autoencoder and write latent vectors");
  encode->add_option("--input", eo.input, "Trajectory CSV")->required();
  encode->add_option("--hidden", eo.cfg.hidden, "Latent size (0 = round(mean length * D))");
  encode->add_option("--epochs", eo.cfg.epochs, "Training epochs");
  encode->add_option("--lr", eo.cfg.learning_rate, "Adam learning rate");
  encode->add_option("--clip", eo.cfg.clip_norm, "Gradient norm clip");
  encode->add_option("--seed", eo.cfg.seed, "Master seed");
  encode->add_option("-o,--output", eo.output, "Latents CSV to write")->required();
  encode->add_option("--checkpoint", eo.checkpoint, "Model JSON to write");
  encode->add_option("--loss", eo.loss, "Per-epoch loss CSV to write");
  no_norm(encode, eo.raw);
  encode->callback([&] { action = [&] { run_encode(eo); }; });

  LearnOpts lo;
  auto* learn = app.add_subcommand("learn", "Learn warping parameters by minimizing latent betaCV");
  learn->add_option("--input", lo.input, "Trajectory CSV")->required();
  learn->add_option("--latents", lo.latents, "Latents CSV")->required();
  learn->add_option("--batch", lo.cfg.batch_size, "Pairs per batch (S)");
  learn->add_option("--percentile", lo.percentile, "Latent threshold percentile, integer percent");
  learn->add_option("--lr", lo.cfg.learning_rate, "Gradient step size");
  learn->add_option("--restarts", lo.cfg.restarts, "Random initializations");
  learn->add_option("--max-steps", lo.cfg.max_steps, "Step cap per restart");
  learn->add_option("--window", lo.cfg.convergence_window, "Steps of small change that count as converged");
  learn->add_option("--tol", lo.cfg.convergence_tol, "Parameter change counted as small");
  learn->add_option("--seed", lo.cfg.seed, "Master seed");
  learn->add_option("-o,--output", lo.output, "Params JSON to write")->required();
  learn->add_option("--trace", lo.trace, "Trace CSV of the winning restart");
  no_norm(learn, lo.raw);
  learn->callback([&] { action = [&] { run_learn(lo); }; });

  DistOpts dopt;
  auto* dist = app.add_subcommand("dist", "Pairwise distance matrix for given parameters");
  dist->add_option("--input", dopt.input, "Trajectory CSV")->required();
  dist->add_option("--params", dopt.params, "Params JSON");
  dist->add_option("--preset", dopt.preset, "euclidean|dtw|edit:G|edr:G:E");
  dist->add_option("-o,--output", dopt.output, "Distance-matrix CSV to write")->required();
  no_norm(dist, dopt.raw);
  dist->callback([&] { action = [&] { run_dist(dopt); }; });

  auto* scan = app.add_subcommand("scan", "betaCV landscapes and distance scans");
  scan->require_subcommand(1);
  GridOpts go;
  auto* grid = scan->add_subcommand("grid", "betaCV over an (alpha, gamma) grid at fixed epsilon");
  grid->add_option("--input", go.input, "Trajectory CSV")->required();
  grid->add_option("--mode", go.mode, "labeled|latent|raw");
  grid->add_option("--labels", go.labels, "Labels CSV (labeled mode)");
  grid->add_option("--latents", go.latents, "Latents CSV (latent mode)");
  grid->add_option("--alpha-steps", go.alpha_steps, "Grid points on alpha");
  grid->add_option("--gamma-steps", go.gamma_steps, "Grid points on gamma");
  grid->add_option("--alpha-max", go.alpha_max, "Largest alpha");
  grid->add_option("--gamma-max", go.gamma_max, "Largest gamma");
  grid->add_option("--epsilon", go.epsilon, "Fixed epsilon");
  grid->add_option("--percentile", go.percentile, "Latent threshold percentile, integer percent");
  grid->add_option("-o,--output", go.output, "Grid CSV to write")->required();
  no_norm(grid, go.raw);
  grid->callback([&] { action = [&] { run_scan_grid(go); }; });

  RandomScanOpts ro;
  auto* rscan = scan->add_subcommand("random", "Latent betaCV and k-NN accuracy over many distances");
  rscan->add_option("--input", ro.input, "Trajectory CSV")->required();
  rscan->add_option("--labels", ro.labels, "Labels CSV")->required();
  rscan->add_option("--latents", ro.latents, "Latents CSV")->required();
  rscan->add_option("--count", ro.count, "Random parameter draws");
  rscan->add_option("--learned", ro.learned, "Learned params JSON files to include");
  rscan->add_option("--gamma0", ro.gamma0, "Gap penalty of the edit and EDR presets");
  rscan->add_option("--epsilon0", ro.epsilon0, "Threshold of the EDR preset");
  rscan->add_option("-k", ro.k, "Neighbors for k-NN accuracy");
  rscan->add_option("--percentile", ro.percentile, "Latent threshold percentile, integer percent");
  rscan->add_option("--seed", ro.seed, "Master seed");
  rscan->add_option("-o,--output", ro.output, "Scan CSV to write")->required();
  rscan->add_option("--summary", ro.summary, "JSON with the Spearman correlation");
  no_norm(rscan, ro.raw);
  rscan->callback([&] { action = [&] { run_scan_random(ro); }; });

  auto* eval = app.add_subcommand("eval", "Evaluate a distance matrix");
  eval->require_subcommand(1);
  EvalOpts vo;
  auto* knn = eval->add_subcommand("knn", "k-nearest-neighbor label agreement");
  knn->add_option("--dist", vo.dist, "Distance-matrix CSV")->required();
  knn->add_option("--labels", vo.labels, "Labels CSV")->required();
  knn->add_option("-k", vo.k, "Neighbors");
  knn->add_option("-o,--output", vo.output, "Report JSON to write")->required();
  knn->callback([&] { action = [&] { run_eval_knn(vo); }; });
  auto* compact = eval->add_subcommand("compactness", "Normalized distance to the k nearest neighbors");
  compact->add_option("--dist", vo.dist, "Distance-matrix CSV")->required();
  compact->add_option("--k-max", vo.k_max, "Largest k");
  compact->add_option("-o,--output", vo.output, "Curve CSV to write")->required();
  compact->callback([&] { action = [&] { run_eval_compactness(vo); }; });
  auto* noise = eval->add_subcommand("noise", "betaCV deviation under random label reassignment");
  noise->add_option("--dist", vo.dist, "Distance-matrix CSV")->required();
  noise->add_option("--labels", vo.labels, "Labels CSV")->required();
  noise->add_option("-p", vo.p, "Reassignment probability");
  noise->add_option("--trials", vo.trials, "Trials");
  noise->add_option("--seed", vo.seed, "Master seed");
  noise->add_option("-o,--output", vo.output, "Report JSON to write")->required();
  noise->callback([&] { action = [&] { run_eval_noise(vo); }; });

  auto* embed = app.add_subcommand("embed", "Low-dimensional embeddings");
  embed->require_subcommand(1);
  EmbedOpts mo;
  auto* mds = embed->add_subcommand("mds", "Classical multidimensional scaling");
  mds->add_option("--dist", mo.dist, "Distance-matrix CSV")->required();
  mds->add_option("--labels", mo.labels, "Labels CSV to append as a column");
  mds->add_option("-k", mo.k, "Embedding dimension");
  mds->add_option("-o,--output", mo.output, "Coordinates CSV to write")->required();
  mds->callback([&] { action = [&] { run_embed_mds(mo); }; });

  auto* cluster = app.add_subcommand("cluster", "Clustering");
  cluster->require_subcommand(1);
  ClusterOpts co;
  auto* spectral = cluster->add_subcommand("spectral", "Spectral clustering");
  spectral->add_option("--dist", co.dist, "Distance-matrix CSV")->required();
  spectral->add_option("-k", co.k, "Clusters");
  spectral->add_option("--seed", co.seed, "Master seed");
  spectral->add_option("-o,--output", co.output, "Assignment CSV to write")->required();
  spectral->callback([&] { action = [&] { run_cluster_spectral(co); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    aw::set_thread_count(threads);
    if (action) action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
