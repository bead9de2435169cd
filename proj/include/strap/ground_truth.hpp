#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace strap {

using SkillId = int;
using TaskId = int;

/// Planted labels for a synthetic corpus: which latent skill each timestep belongs to and
/// which skills each task concatenates.
struct GroundTruth {
  std::map<std::string, std::vector<SkillId>> labels;  // trajectory id -> per-timestep skill
  std::map<TaskId, std::vector<SkillId>> tasks;        // task id -> skill sequence
  std::map<std::string, TaskId> trajectory_task;       // trajectory id -> task id
  std::optional<TaskId> target_task;

  /// Tasks other than the target that contain at least one of the target task's skills.
  std::vector<TaskId> tasks_sharing_target_skills() const;
};

nlohmann::json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& file);
GroundTruth load_ground_truth(const std::filesystem::path& file);

}  // namespace strap
