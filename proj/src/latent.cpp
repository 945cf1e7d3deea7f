#include "autowarp/latent.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "autowarp/io.hpp"
#include "autowarp/parallel.hpp"

namespace autowarp {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one LSTM step, kept for the backward pass.
struct StepCache {
  Eigen::VectorXd input;
  Eigen::VectorXd h_prev, c_prev;
  Eigen::VectorXd i, f, o, g;
  Eigen::VectorXd c, tanh_c, h;
};

template <typename W, typename U, typename B>
void lstm_step(const W& w, const U& u, const B& b, const Eigen::VectorXd& x, StepCache& s) {
  const Eigen::Index h = s.h_prev.size();
  Eigen::VectorXd z = b;
  z.noalias() += w * x;
  z.noalias() += u * s.h_prev;
  s.input = x;
  s.i = z.segment(0, h).unaryExpr(&logistic);
  s.f = z.segment(h, h).unaryExpr(&logistic);
  s.o = z.segment(2 * h, h).unaryExpr(&logistic);
  s.g = z.segment(3 * h, h).array().tanh();
  s.c = s.f.cwiseProduct(s.c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh();
  s.h = s.o.cwiseProduct(s.tanh_c);
}

// Backprop through one step. dh/dc are the gradients flowing into this
// step's outputs; on return they hold gradients for the previous step.
template <typename W, typename U, typename GW, typename GU, typename GB>
void lstm_step_backward(const W& w, const U& u, const StepCache& s, Eigen::VectorXd& dh, Eigen::VectorXd& dc,
                        GW&& gw, GU&& gu, GB&& gb, Eigen::VectorXd* dx) {
  const Eigen::Index h = dh.size();
  Eigen::VectorXd dz(4 * h);
  const Eigen::ArrayXd d_o = dh.array() * s.tanh_c.array();
  const Eigen::ArrayXd dct = dc.array() + dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square());
  dz.segment(0, h) = (dct * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
  dz.segment(h, h) = (dct * s.c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
  dz.segment(2 * h, h) = (d_o * s.o.array() * (1.0 - s.o.array())).matrix();
  dz.segment(3 * h, h) = (dct * s.i.array() * (1.0 - s.g.array().square())).matrix();
  gw.noalias() += dz * s.input.transpose();
  gu.noalias() += dz * s.h_prev.transpose();
  gb += dz;
  if (dx) dx->noalias() += w.transpose() * dz;
  dh.noalias() = u.transpose() * dz;
  dc = (dct * s.f.array()).matrix();
}

void check_dims(const AutoencoderModel& model, const Eigen::MatrixXd& states) {
  AUTOWARP_REQUIRE(states.rows() >= 1, "trajectory must have at least one state");
  AUTOWARP_REQUIRE(static_cast<std::size_t>(states.cols()) == model.input_dim(),
                   "trajectory dimension does not match the model");
}

std::vector<StepCache> run_encoder(const AutoencoderModel& model, const Eigen::MatrixXd& states) {
  const auto h = static_cast<Eigen::Index>(model.hidden());
  std::vector<StepCache> steps(static_cast<std::size_t>(states.rows()));
  Eigen::VectorXd hp = Eigen::VectorXd::Zero(h), cp = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < states.rows(); ++t) {
    auto& s = steps[static_cast<std::size_t>(t)];
    s.h_prev = hp;
    s.c_prev = cp;
    lstm_step(model.enc_W(), model.enc_U(), model.enc_b(), states.row(t).transpose(), s);
    hp = s.h;
    cp = s.c;
  }
  return steps;
}

std::vector<StepCache> run_decoder(const AutoencoderModel& model, const Eigen::VectorXd& latent, std::size_t n) {
  const auto h = static_cast<Eigen::Index>(model.hidden());
  std::vector<StepCache> steps(n);
  Eigen::VectorXd hp = Eigen::VectorXd::Zero(h), cp = Eigen::VectorXd::Zero(h);
  for (std::size_t t = 0; t < n; ++t) {
    auto& s = steps[t];
    s.h_prev = hp;
    s.c_prev = cp;
    lstm_step(model.dec_W(), model.dec_U(), model.dec_b(), latent, s);
    hp = s.h;
    cp = s.c;
  }
  return steps;
}

}  // namespace

std::size_t default_hidden_size(const TrajectoryDataset& ds) {
  const double v = std::round(ds.mean_length() * static_cast<double>(ds.dim()));
  return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

AutoencoderModel::AutoencoderModel(std::size_t input_dim, std::size_t hidden)
    : input_dim_(input_dim), hidden_(hidden) {
  AUTOWARP_REQUIRE(input_dim >= 1 && hidden >= 1, "autoencoder dimensions must be >= 1");
  const std::size_t d = input_dim, h = hidden;
  const std::size_t dims[kBlockCount][2] = {{4 * h, d}, {4 * h, h}, {4 * h, 1}, {4 * h, h},
                                           {4 * h, h}, {4 * h, 1}, {d, h},     {d, 1}};
  std::size_t offset = 0;
  for (int b = 0; b < kBlockCount; ++b) {
    shapes_[b] = {offset, dims[b][0], dims[b][1]};
    offset += dims[b][0] * dims[b][1];
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

AutoencoderModel AutoencoderModel::initialized(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  AutoencoderModel m(input_dim, hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index k = 0; k < m.theta_.size(); ++k) m.theta_(k) = rng.uniform(-bound, bound);
  return m;
}

const char* AutoencoderModel::block_name(Block b) {
  static const char* names[kBlockCount] = {"encoder.W", "encoder.U", "encoder.b",    "decoder.W",
                                           "decoder.U", "decoder.b", "projection.W", "projection.b"};
  return names[b];
}

MatrixView AutoencoderModel::matrix(Block b) {
  const auto& s = shapes_[b];
  return {theta_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols)};
}
ConstMatrixView AutoencoderModel::matrix(Block b) const {
  const auto& s = shapes_[b];
  return {theta_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols)};
}
VectorView AutoencoderModel::vector(Block b) {
  const auto& s = shapes_[b];
  return {theta_.data() + s.offset, static_cast<Eigen::Index>(s.rows)};
}
ConstVectorView AutoencoderModel::vector(Block b) const {
  const auto& s = shapes_[b];
  return {theta_.data() + s.offset, static_cast<Eigen::Index>(s.rows)};
}

Eigen::VectorXd encode(const AutoencoderModel& model, const Eigen::MatrixXd& states) {
  check_dims(model, states);
  return run_encoder(model, states).back().h;
}

Eigen::VectorXd encode(const AutoencoderModel& model, const Trajectory& t) { return encode(model, t.states); }

Eigen::MatrixXd decode(const AutoencoderModel& model, const Eigen::VectorXd& h, std::size_t n) {
  AUTOWARP_REQUIRE(n >= 1, "decode length must be >= 1");
  AUTOWARP_REQUIRE(static_cast<std::size_t>(h.size()) == model.hidden(), "latent size does not match the model");
  AUTOWARP_REQUIRE(h.allFinite(), "latent must be finite");
  const auto steps = run_decoder(model, h, n);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.input_dim()));
  for (std::size_t t = 0; t < n; ++t)
    out.row(static_cast<Eigen::Index>(t)) = (model.proj_W() * steps[t].h + model.proj_b()).transpose();
  return out;
}

double reconstruction_loss(const AutoencoderModel& model, const Eigen::MatrixXd& states) {
  const Eigen::MatrixXd y = decode(model, encode(model, states), static_cast<std::size_t>(states.rows()));
  return (y - states).squaredNorm() / static_cast<double>(states.rows());
}

double loss_and_gradient(const AutoencoderModel& model, const Eigen::MatrixXd& states, AutoencoderModel& grad) {
  check_dims(model, states);
  AUTOWARP_REQUIRE(grad.parameter_count() == model.parameter_count(), "gradient shape does not match the model");
  grad.parameters().setZero();
  const auto n = static_cast<std::size_t>(states.rows());
  const auto h = static_cast<Eigen::Index>(model.hidden());

  const auto enc = run_encoder(model, states);
  const Eigen::VectorXd latent = enc.back().h;
  const auto dec = run_decoder(model, latent, n);

  double loss = 0.0;
  const double scale = 2.0 / static_cast<double>(n);
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(h), dc = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dlatent = Eigen::VectorXd::Zero(h);
  auto gPW = grad.proj_W();
  auto gPb = grad.proj_b();
  for (std::size_t t = n; t-- > 0;) {
    const Eigen::VectorXd y = model.proj_W() * dec[t].h + model.proj_b();
    const Eigen::VectorXd err = y - states.row(static_cast<Eigen::Index>(t)).transpose();
    loss += err.squaredNorm();
    const Eigen::VectorXd dy = scale * err;
    gPW.noalias() += dy * dec[t].h.transpose();
    gPb += dy;
    dh.noalias() += model.proj_W().transpose() * dy;
    lstm_step_backward(model.dec_W(), model.dec_U(), dec[t], dh, dc, grad.dec_W(), grad.dec_U(), grad.dec_b(),
                       &dlatent);
  }

  dh = dlatent;
  dc.setZero();
  for (std::size_t t = n; t-- > 0;)
    lstm_step_backward(model.enc_W(), model.enc_U(), enc[t], dh, dc, grad.enc_W(), grad.enc_U(), grad.enc_b(),
                       nullptr);
  return loss / static_cast<double>(n);
}

TrainResult train_autoencoder(const TrajectoryDataset& ds, const AutoencoderConfig& cfg) {
  AUTOWARP_REQUIRE(ds.size() >= 1, "training needs at least one trajectory");
  const std::size_t hidden = cfg.hidden ? cfg.hidden : default_hidden_size(ds);
  const Rng root(cfg.seed);
  Rng init_rng = root.substream("autoencoder.init");
  Rng order_rng = root.substream("autoencoder.order");

  TrainResult result{AutoencoderModel::initialized(static_cast<std::size_t>(ds.dim()), hidden, init_rng), {}};
  AutoencoderModel& model = result.model;
  AutoencoderModel grad = model.zeros_like();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(model.parameters().size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(model.parameters().size());
  double b1_pow = 1.0, b2_pow = 1.0;

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[order_rng.index(k)]);
    double total = 0.0;
    for (std::size_t idx : order) {
      const double loss = loss_and_gradient(model, ds[idx].states, grad);
      if (!std::isfinite(loss) || !grad.parameters().allFinite())
        throw DataError("autoencoder training diverged at epoch " + std::to_string(epoch));
      total += loss;
      Eigen::VectorXd& g = grad.parameters();
      const double norm = g.norm();
      if (norm > cfg.clip_norm) g *= cfg.clip_norm / norm;
      b1_pow *= cfg.beta1;
      b2_pow *= cfg.beta2;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
      model.parameters().array() -= cfg.learning_rate * (m.array() / (1.0 - b1_pow)) /
                                    ((v.array() / (1.0 - b2_pow)).sqrt() + cfg.adam_epsilon);
    }
    result.loss_curve.push_back(total / static_cast<double>(ds.size()));
  }
  return result;
}

LatentMatrix encode_dataset(const AutoencoderModel& model, const TrajectoryDataset& ds) {
  LatentMatrix lm{ds.ids(), Eigen::MatrixXd(static_cast<Eigen::Index>(ds.size()),
                                            static_cast<Eigen::Index>(model.hidden()))};
  std::vector<Eigen::VectorXd> rows(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) { rows[i] = encode(model, ds[i]); });
  for (std::size_t i = 0; i < ds.size(); ++i) lm.vectors.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return lm;
}

std::string checkpoint_json(const AutoencoderModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "autowarp-seq2seq-lstm";
  j["input_dim"] = model.input_dim();
  j["hidden"] = model.hidden();
  j["gate_order"] = {"input", "forget", "output", "candidate"};
  j["layout"] = "row-major";
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (int b = 0; b < AutoencoderModel::kBlockCount; ++b) {
    const auto s = model.shape(static_cast<AutoencoderModel::Block>(b));
    std::vector<double> values(model.parameters().data() + s.offset,
                               model.parameters().data() + s.offset + s.rows * s.cols);
    nlohmann::ordered_json blk;
    blk["name"] = AutoencoderModel::block_name(static_cast<AutoencoderModel::Block>(b));
    blk["rows"] = s.rows;
    blk["cols"] = s.cols;
    blk["values"] = values;
    blocks.push_back(std::move(blk));
  }
  j["blocks"] = std::move(blocks);
  return j.dump() + "\n";
}

void save_checkpoint(const std::string& path, const AutoencoderModel& model) {
  io::write_text(path, checkpoint_json(model));
}

AutoencoderModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  try {
    nlohmann::json j;
    in >> j;
    AutoencoderModel model(j.at("input_dim").get<std::size_t>(), j.at("hidden").get<std::size_t>());
    const auto& blocks = j.at("blocks");
    if (blocks.size() != AutoencoderModel::kBlockCount) throw DataError(path + ": wrong number of weight blocks");
    for (int b = 0; b < AutoencoderModel::kBlockCount; ++b) {
      const auto s = model.shape(static_cast<AutoencoderModel::Block>(b));
      const auto& blk = blocks[static_cast<std::size_t>(b)];
      if (blk.at("name").get<std::string>() != AutoencoderModel::block_name(static_cast<AutoencoderModel::Block>(b)) ||
          blk.at("rows").get<std::size_t>() != s.rows || blk.at("cols").get<std::size_t>() != s.cols)
        throw DataError(path + ": weight block " + std::to_string(b) + " has unexpected name or shape");
      const auto values = blk.at("values").get<std::vector<double>>();
      if (values.size() != s.rows * s.cols) throw DataError(path + ": weight block size mismatch");
      std::copy(values.begin(), values.end(), model.parameters().data() + s.offset);
    }
    if (!model.parameters().allFinite()) throw DataError(path + ": non-finite weights");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid checkpoint: " + e.what());
  }
}

LatentMatrix load_latents(const std::string& path, const std::vector<std::string>& ids) {
  LatentMatrix lm = io::align_latents(io::read_latents(path), ids);
  lm.validate();
  return lm;
}

}  // namespace autowarp
