#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autowarp/betacv.hpp"
#include "autowarp/core.hpp"

namespace autowarp::io {

// Trajectory CSV: traj_id,step,dim_0,...,dim_{D-1}
TrajectoryDataset read_trajectories(const std::string& path);
TrajectoryDataset parse_trajectories(std::istream& in, const std::string& source);
void write_trajectories(const std::string& path, const TrajectoryDataset& ds);
void write_trajectories(std::ostream& out, const TrajectoryDataset& ds);

// Labels CSV: traj_id,label
std::map<std::string, int> read_labels(const std::string& path);
void write_labels(const std::string& path, const TrajectoryDataset& ds);
/// Attaches labels to ds in trajectory order; every id must be labeled.
TrajectoryDataset attach_labels(const TrajectoryDataset& ds, const std::map<std::string, int>& labels,
                                const std::string& source);

// Latents CSV: traj_id,z_0,...,z_{dh-1}
LatentMatrix read_latents(const std::string& path);
LatentMatrix parse_latents(std::istream& in, const std::string& source);
/// Reorders rows to `ids`; missing or unknown ids are errors.
LatentMatrix align_latents(const LatentMatrix& latents, const std::vector<std::string>& ids);
void write_latents(const std::string& path, const LatentMatrix& latents);
void write_latents(std::ostream& out, const LatentMatrix& latents);

// Distance-matrix CSV: header "traj_id,<ids...>", then one row per id.
DistanceMatrix read_distance_matrix(const std::string& path);
void write_distance_matrix(const std::string& path, const DistanceMatrix& dm);
void write_distance_matrix(std::ostream& out, const DistanceMatrix& dm);

// Params JSON: {"alpha":..,"gamma":..,"epsilon":..,"betacv":..}
struct ParamsFile {
  WarpParams params;
  std::optional<double> betacv;
};
ParamsFile read_params(const std::string& path);
void write_params(const std::string& path, const WarpParams& params, std::optional<double> betacv);
std::string params_json(const WarpParams& params, std::optional<double> betacv);

std::string noise_report_json(const NoiseReport& report);

/// Shortest round-trip decimal form of x; "inf" for +infinity.
std::string format_double(double x);
/// Writes text to path, throwing DataError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace autowarp::io
