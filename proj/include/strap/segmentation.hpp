#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strap/dataset.hpp"

namespace strap {

struct SegmentationConfig {
  double epsilon = 0.0;     // speed threshold, meters per timestep
  std::size_t min_len = 20;
};

struct Segmentation {
  std::string trajectory_id;
  std::vector<SubTrajectoryRef> chunks;
};

/// End-effector speed between consecutive timesteps, from the first three proprio columns.
/// Returns H-1 values.
std::vector<double> compute_speeds(const Matrix& proprio);

/// Interior timesteps t in [1, H-1) whose incoming and outgoing speeds are both below epsilon,
/// collapsed to the floor-midpoint of each maximal consecutive run.
std::vector<std::size_t> transition_cuts(std::span<const double> speeds, double epsilon);

/// Repeatedly folds the shortest chunk below `min_len` into its shorter neighbour (ties go
/// right; among equally short chunks the leftmost goes first) until every chunk is long
/// enough or a single chunk is left.
std::vector<SubTrajectoryRef> merge_short_chunks(std::vector<SubTrajectoryRef> chunks,
                                                 std::size_t min_len, std::size_t horizon);

Segmentation segment_trajectory(const Trajectory& traj, const SegmentationConfig& cfg);

/// Calibration recipe for epsilon: the given quantile (default the 10th percentile) of all
/// per-step speeds observed in `d`.
double calibrate_epsilon(const Dataset& d, double quantile = 0.10);

}  // namespace strap
