#include "autowarp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace autowarp::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t row, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << row << ": " << what;
  throw DataError(os.str());
}

double parse_double(const std::string& s, const std::string& source, std::size_t row) {
  if (s == "inf") return kInf;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(source, row, "malformed number '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::string& source, std::size_t row) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(source, row, "malformed integer '" + s + "'");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

bool next_line(std::istream& in, std::string& line, std::size_t& row) {
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::vector<std::size_t> sorted_order(const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return order;
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw DataError(path + ": write failed");
}

TrajectoryDataset parse_trajectories(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row)) fail(source, 1, "empty file (expected header traj_id,step,dim_0,...)");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "traj_id" || header[1] != "step")
    fail(source, row, "header must be traj_id,step,dim_0,...,dim_{D-1}");
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k)
    if (header[k + 2] != "dim_" + std::to_string(k)) fail(source, row, "expected column dim_" + std::to_string(k));

  std::vector<Trajectory> out;
  std::vector<std::vector<double>> buffer;
  std::set<std::string> finished;
  std::string current;
  auto flush = [&] {
    if (current.empty() && buffer.empty()) return;
    Eigen::MatrixXd s(static_cast<Eigen::Index>(buffer.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < buffer.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = buffer[i][k];
    out.push_back({current, std::move(s)});
    finished.insert(current);
    buffer.clear();
  };

  bool started = false;
  while (next_line(in, line, row)) {
    const auto f = split_csv(line);
    if (f.size() != d + 2) fail(source, row, "expected " + std::to_string(d + 2) + " fields, found " + std::to_string(f.size()));
    if (f[0].empty()) fail(source, row, "empty traj_id");
    if (!started || f[0] != current) {
      if (started) flush();
      if (finished.count(f[0])) fail(source, row, "rows for traj_id '" + f[0] + "' are not contiguous");
      current = f[0];
      started = true;
    }
    const long step = parse_long(f[1], source, row);
    if (step != static_cast<long>(buffer.size()))
      fail(source, row, "step " + f[1] + " for '" + current + "' breaks the 0-based contiguous sequence");
    std::vector<double> state(d);
    for (std::size_t k = 0; k < d; ++k) {
      state[k] = parse_double(f[k + 2], source, row);
      if (!std::isfinite(state[k])) fail(source, row, "non-finite state component");
    }
    buffer.push_back(std::move(state));
  }
  if (started) flush();
  if (out.empty()) fail(source, row, "no trajectories");
  return TrajectoryDataset(std::move(out));
}

TrajectoryDataset read_trajectories(const std::string& path) {
  auto in = open_in(path);
  return parse_trajectories(in, path);
}

void write_trajectories(std::ostream& out, const TrajectoryDataset& ds) {
  out << "traj_id,step";
  for (Eigen::Index k = 0; k < ds.dim(); ++k) out << ",dim_" << k;
  out << "\n";
  const auto ids = ds.ids();
  for (std::size_t idx : sorted_order(ids)) {
    const auto& t = ds[idx];
    for (Eigen::Index i = 0; i < t.length(); ++i) {
      out << t.id << "," << i;
      for (Eigen::Index k = 0; k < t.dim(); ++k) out << "," << format_double(t.states(i, k));
      out << "\n";
    }
  }
}

void write_trajectories(const std::string& path, const TrajectoryDataset& ds) {
  auto out = open_out(path);
  write_trajectories(out, ds);
}

std::map<std::string, int> read_labels(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row) || split_csv(line) != std::vector<std::string>{"traj_id", "label"})
    fail(path, row ? row : 1, "header must be traj_id,label");
  std::map<std::string, int> labels;
  while (next_line(in, line, row)) {
    const auto f = split_csv(line);
    if (f.size() != 2) fail(path, row, "expected 2 fields");
    if (!labels.emplace(f[0], static_cast<int>(parse_long(f[1], path, row))).second)
      fail(path, row, "duplicate label for '" + f[0] + "'");
  }
  return labels;
}

void write_labels(const std::string& path, const TrajectoryDataset& ds) {
  auto out = open_out(path);
  out << "traj_id,label\n";
  const auto ids = ds.ids();
  for (std::size_t idx : sorted_order(ids)) out << ids[idx] << "," << ds.labels()[idx] << "\n";
}

TrajectoryDataset attach_labels(const TrajectoryDataset& ds, const std::map<std::string, int>& labels,
                                const std::string& source) {
  std::vector<int> aligned;
  aligned.reserve(ds.size());
  for (const auto& t : ds.trajectories()) {
    const auto it = labels.find(t.id);
    if (it == labels.end()) throw DataError(source + ": no label for trajectory '" + t.id + "'");
    aligned.push_back(it->second);
  }
  return ds.with_labels(std::move(aligned));
}

LatentMatrix parse_latents(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row)) fail(source, 1, "empty file (expected header traj_id,z_0,...)");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "traj_id") fail(source, row, "header must be traj_id,z_0,...,z_{dh-1}");
  const std::size_t dh = header.size() - 1;
  for (std::size_t k = 0; k < dh; ++k)
    if (header[k + 1] != "z_" + std::to_string(k)) fail(source, row, "expected column z_" + std::to_string(k));
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::set<std::string> seen;
  while (next_line(in, line, row)) {
    const auto f = split_csv(line);
    if (f.size() != dh + 1)
      fail(source, row, "ragged row: expected " + std::to_string(dh + 1) + " fields, found " + std::to_string(f.size()));
    if (!seen.insert(f[0]).second) fail(source, row, "duplicate id '" + f[0] + "'");
    std::vector<double> v(dh);
    for (std::size_t k = 0; k < dh; ++k) {
      v[k] = parse_double(f[k + 1], source, row);
      if (!std::isfinite(v[k])) fail(source, row, "non-finite latent entry");
    }
    ids.push_back(f[0]);
    rows.push_back(std::move(v));
  }
  LatentMatrix lm{ids, Eigen::MatrixXd(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dh))};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < dh; ++k) lm.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return lm;
}

LatentMatrix read_latents(const std::string& path) {
  auto in = open_in(path);
  return parse_latents(in, path);
}

LatentMatrix align_latents(const LatentMatrix& latents, const std::vector<std::string>& ids) {
  std::map<std::string, Eigen::Index> where;
  for (std::size_t i = 0; i < latents.ids.size(); ++i) where[latents.ids[i]] = static_cast<Eigen::Index>(i);
  std::vector<std::string> missing;
  for (const auto& id : ids)
    if (!where.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "latents missing id(s):";
    for (const auto& id : missing) msg += " " + id;
    throw DataError(msg);
  }
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<std::string> extra;
  for (const auto& id : latents.ids)
    if (!wanted.count(id)) extra.push_back(id);
  if (!extra.empty()) {
    std::string msg = "latents contain unknown id(s):";
    for (const auto& id : extra) msg += " " + id;
    throw DataError(msg);
  }
  LatentMatrix out{ids, Eigen::MatrixXd(static_cast<Eigen::Index>(ids.size()), latents.vectors.cols())};
  for (std::size_t i = 0; i < ids.size(); ++i) out.vectors.row(static_cast<Eigen::Index>(i)) = latents.vectors.row(where[ids[i]]);
  return out;
}

void write_latents(std::ostream& out, const LatentMatrix& latents) {
  out << "traj_id";
  for (Eigen::Index k = 0; k < latents.vectors.cols(); ++k) out << ",z_" << k;
  out << "\n";
  for (std::size_t i = 0; i < latents.ids.size(); ++i) {
    out << latents.ids[i];
    for (Eigen::Index k = 0; k < latents.vectors.cols(); ++k)
      out << "," << format_double(latents.vectors(static_cast<Eigen::Index>(i), k));
    out << "\n";
  }
}

void write_latents(const std::string& path, const LatentMatrix& latents) {
  auto out = open_out(path);
  write_latents(out, latents);
}

DistanceMatrix read_distance_matrix(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row)) fail(path, 1, "empty file");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "traj_id") fail(path, row, "header must start with traj_id");
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const auto t = static_cast<Eigen::Index>(ids.size());
  DistanceMatrix dm{ids, Eigen::MatrixXd(t, t)};
  Eigen::Index r = 0;
  while (next_line(in, line, row)) {
    const auto f = split_csv(line);
    if (r >= t) fail(path, row, "more rows than ids");
    if (static_cast<Eigen::Index>(f.size()) != t + 1) fail(path, row, "ragged row");
    if (f[0] != ids[static_cast<std::size_t>(r)]) fail(path, row, "row id '" + f[0] + "' does not match header order");
    for (Eigen::Index c = 0; c < t; ++c) dm.values(r, c) = parse_double(f[static_cast<std::size_t>(c) + 1], path, row);
    ++r;
  }
  if (r != t) fail(path, row, "fewer rows than ids");
  dm.validate();
  return dm;
}

void write_distance_matrix(std::ostream& out, const DistanceMatrix& dm) {
  out << "traj_id";
  for (const auto& id : dm.ids) out << "," << id;
  out << "\n";
  for (std::size_t i = 0; i < dm.ids.size(); ++i) {
    out << dm.ids[i];
    for (std::size_t j = 0; j < dm.ids.size(); ++j)
      out << "," << format_double(dm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << "\n";
  }
}

void write_distance_matrix(const std::string& path, const DistanceMatrix& dm) {
  auto out = open_out(path);
  write_distance_matrix(out, dm);
}

std::string params_json(const WarpParams& params, std::optional<double> betacv) {
  nlohmann::ordered_json j;
  j["alpha"] = params.alpha;
  j["gamma"] = params.gamma;
  j["epsilon"] = params.epsilon;
  if (betacv) j["betacv"] = *betacv;
  else j["betacv"] = nullptr;
  return j.dump(2) + "\n";
}

ParamsFile read_params(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  ParamsFile pf;
  try {
    pf.params = {j.at("alpha").get<double>(), j.at("gamma").get<double>(), j.at("epsilon").get<double>()};
    if (j.contains("betacv") && !j["betacv"].is_null()) pf.betacv = j["betacv"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": params JSON needs numeric alpha, gamma, epsilon: " + e.what());
  }
  try {
    pf.params.validate();
  } catch (const ContractError& e) {
    throw DataError(path + ": " + e.what());
  }
  return pf;
}

void write_params(const std::string& path, const WarpParams& params, std::optional<double> betacv) {
  write_text(path, params_json(params, betacv));
}

std::string noise_report_json(const NoiseReport& r) {
  nlohmann::ordered_json j;
  j["trials"] = r.trials;
  j["p"] = r.p;
  j["mean_dev"] = r.mean_dev;
  j["max_dev"] = r.max_dev;
  j["K"] = r.K;
  j["C1"] = r.C1;
  j["C2"] = r.C2;
  return j.dump(2) + "\n";
}

}  // namespace autowarp::io
