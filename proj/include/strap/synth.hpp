#pragma once

#include <cstddef>
#include <cstdint>
#include <map>

#include "strap/dataset.hpp"
#include "strap/ground_truth.hpp"
#include "strap/retrieval.hpp"

namespace strap {

/// Planted-skill corpus parameters.
///
/// Every skill is a piecewise-linear curve through `anchors_per_skill` points drawn from a
/// shared pool, so different skills visit the same states in different orders. A task is a
/// sequence of `skills_per_task` distinct skills. `tasks` prior tasks are generated plus one
/// held-out target task whose demonstrations form the target dataset.
struct SynthConfig {
  std::size_t n_skills = 8;
  std::size_t skill_len_min = 30;
  std::size_t skill_len_max = 60;
  std::size_t tasks = 12;
  std::size_t skills_per_task = 2;
  std::size_t trajectories_per_task = 5;
  std::size_t embedding_dim = 16;
  double warp_jitter = 0.2;   // in [0, 1)
  double noise_sigma = 0.05;  // embedding noise standard deviation
  std::uint64_t seed = 7;

  std::size_t anchors_per_skill = 3;
  std::size_t anchor_pool = 0;  // 0: one pool point per skill
  /// Prior tasks forced to contain a target skill, assigned round-robin over target skills.
  std::size_t shared_tasks = 4;
  /// Remaining prior tasks draw only from skills the target does not use.
  bool isolate_unshared = false;
  /// End-effector speed between ramps, meters per timestep. Dyadic values keep every
  /// position and speed exact in float32.
  double cruise_speed_m = 0.0078125;
  std::size_t ramp_steps = 8;
  double frequency_hz = 15.0;
};

/// Throws ConfigInvalid when the parameters cannot produce a corpus.
void validate_synth_config(const SynthConfig& cfg);

struct SynthData {
  Dataset prior;
  Dataset target;
  GroundTruth truth;
};

SynthData generate_synthetic(const SynthConfig& cfg);

/// Single-state retrieval: every prior timestep scored by its best 1 - cosine against any
/// target timestep; the k cheapest prior timesteps are returned as [t - pad_h, t + pad_h)
/// clamped to the trajectory.
RetrievalResult baseline_state_retrieval(const Dataset& targets, const Dataset& prior,
                                         std::size_t k, std::size_t pad_h,
                                         std::size_t threads = 0);

/// Full-trajectory retrieval: the main pipeline with one query per target trajectory.
RetrievalResult baseline_full_trajectory(const Dataset& targets, const Dataset& prior,
                                         std::size_t k, DistanceMetric metric,
                                         std::size_t threads = 0);

struct EvalMetrics {
  /// Fraction of retrieved timesteps labelled with their query's majority skill.
  double precision_at_k = 0.0;
  std::size_t task_sparsity = 0;  // distinct prior tasks retrieved from
  std::map<TaskId, double> task_shares;
  /// Share of retrieved timesteps from prior tasks that use a target skill.
  double relevant_task_share = 0.0;
  std::size_t retrieved_timesteps = 0;
  bool empty = true;
};

EvalMetrics evaluate(const RetrievalResult& result, const GroundTruth& gt);

nlohmann::json to_json(const EvalMetrics& m);

struct MethodComparison {
  EvalMetrics strap;
  EvalMetrics full_trajectory;
  EvalMetrics single_state;
  double epsilon = 0.0;  // segmentation threshold actually used
};

/// Runs the main pipeline and both baselines on one synthetic corpus. A negative
/// `seg.epsilon` is replaced by calibrate_epsilon on the targets.
MethodComparison compare_methods(const SynthData& data, std::size_t k, std::size_t pad_h,
                                 SegmentationConfig seg, std::size_t threads = 0);

}  // namespace strap
