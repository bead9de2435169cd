#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "strap/dataset.hpp"
#include "strap/dtw.hpp"

namespace strap {

struct BenchConfig {
  std::vector<std::size_t> sizes{100, 200, 400, 800};
  std::size_t traj_len = 250;
  std::size_t chunks = 5;
  std::size_t chunk_len = 50;
  std::size_t embedding_dim = 768;
  std::size_t trials = 3;
  std::size_t k = 100;
  DistanceMetric metric = DistanceMetric::l2;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct BenchRow {
  std::size_t prior_size = 0;
  std::size_t total_prior_timesteps = 0;
  double wall_ms_mean = 0.0;
  double wall_ms_std = 0.0;
  std::size_t trials = 0;
  std::vector<double> samples_ms;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;
  LinearFit fit;  // wall_ms_mean against prior_size
};

/// Least-squares line through (x, y). r_squared is 1 when y has no variance and the fit is exact.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Seeded retrieval workload: a prior of `prior_size` random trajectories and one target
/// trajectory of the same length, cut into `chunks` consecutive queries of `chunk_len`.
/// Trajectory i of the prior depends only on (seed, i), so smaller priors are prefixes of
/// larger ones.
struct BenchWorkload {
  Dataset target;
  Dataset prior;
  std::vector<SubTrajectoryRef> queries;
};

BenchWorkload make_bench_workload(const BenchConfig& cfg, std::size_t prior_size);

/// Grows `w.prior` to `prior_size` trajectories under the same seeding as make_bench_workload.
void grow_bench_prior(BenchWorkload& w, const BenchConfig& cfg, std::size_t prior_size);

/// Times match + top-k selection per prior size: one untimed warm-up, then `trials` runs.
BenchReport run_benchmark(const BenchConfig& cfg);

/// time(size[i+1]) / time(size[i]) for consecutive rows.
std::vector<double> scaling_ratios(const BenchReport& report);

nlohmann::json to_json(const BenchReport& report);
std::string bench_csv(const BenchReport& report);

}  // namespace strap
