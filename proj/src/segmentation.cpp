#include "strap/segmentation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "strap/error.hpp"

namespace strap {

std::vector<double> compute_speeds(const Matrix& proprio) {
  const std::size_t h = proprio.rows();
  if (h < 2) throw Error(ErrorCode::TooShort, "need at least 2 timesteps, got " + std::to_string(h));
  if (proprio.cols() < 3) {
    throw Error(ErrorCode::TooFewProprioColumns,
                "need 3 position columns, got " + std::to_string(proprio.cols()));
  }
  std::vector<double> speeds(h - 1);
  for (std::size_t t = 0; t + 1 < h; ++t) {
    double sq = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = static_cast<double>(proprio(t + 1, c)) - static_cast<double>(proprio(t, c));
      sq += d * d;
    }
    speeds[t] = std::sqrt(sq);
  }
  return speeds;
}

std::vector<std::size_t> transition_cuts(std::span<const double> speeds, double epsilon) {
  const std::size_t h = speeds.size() + 1;
  std::vector<std::size_t> cuts;
  std::size_t t = 1;
  while (t + 1 < h) {
    if (!(speeds[t - 1] < epsilon && speeds[t] < epsilon)) {
      ++t;
      continue;
    }
    const std::size_t run_begin = t;
    while (t + 1 < h && speeds[t - 1] < epsilon && speeds[t] < epsilon) ++t;
    const std::size_t run_last = t - 1;
    cuts.push_back((run_begin + run_last) / 2);
  }
  return cuts;
}

std::vector<SubTrajectoryRef> merge_short_chunks(std::vector<SubTrajectoryRef> chunks,
                                                 std::size_t min_len, std::size_t horizon) {
  assert(!chunks.empty() && chunks.front().start == 0 && chunks.back().end == horizon);
  (void)horizon;
  while (chunks.size() > 1) {
    std::size_t victim = chunks.size();
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      if (chunks[i].length() >= min_len) continue;
      if (victim == chunks.size() || chunks[i].length() < chunks[victim].length()) victim = i;
    }
    if (victim == chunks.size()) break;

    std::size_t into;
    if (victim == 0) {
      into = 1;
    } else if (victim + 1 == chunks.size()) {
      into = victim - 1;
    } else {
      into = chunks[victim - 1].length() < chunks[victim + 1].length() ? victim - 1 : victim + 1;
    }
    chunks[into].start = std::min(chunks[into].start, chunks[victim].start);
    chunks[into].end = std::max(chunks[into].end, chunks[victim].end);
    chunks.erase(chunks.begin() + static_cast<std::ptrdiff_t>(victim));
  }
  return chunks;
}

Segmentation segment_trajectory(const Trajectory& traj, const SegmentationConfig& cfg) {
  if (cfg.min_len < 1 || !(cfg.epsilon >= 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "min_len must be >= 1 and epsilon >= 0");
  }
  const std::size_t h = traj.length();
  const std::vector<double> speeds = compute_speeds(traj.proprio);

  std::vector<SubTrajectoryRef> chunks;
  std::size_t begin = 0;
  for (std::size_t cut : transition_cuts(speeds, cfg.epsilon)) {
    chunks.push_back({traj.id, begin, cut});
    begin = cut;
  }
  chunks.push_back({traj.id, begin, h});
  return {traj.id, merge_short_chunks(std::move(chunks), cfg.min_len, h)};
}

double calibrate_epsilon(const Dataset& d, double quantile) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "quantile must lie in [0, 1]");
  }
  std::vector<double> all;
  for (const Trajectory& t : d.trajectories) {
    const auto s = compute_speeds(t.proprio);
    all.insert(all.end(), s.begin(), s.end());
  }
  if (all.empty()) throw Error(ErrorCode::EmptyInput, "no speeds to calibrate from");
  std::sort(all.begin(), all.end());
  const auto idx = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(all.size() - 1)));
  return all[idx];
}

}  // namespace strap
