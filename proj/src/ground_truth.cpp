#include "strap/ground_truth.hpp"

#include <algorithm>
#include <fstream>

#include "strap/error.hpp"

namespace strap {

using nlohmann::json;

std::vector<TaskId> GroundTruth::tasks_sharing_target_skills() const {
  std::vector<TaskId> out;
  if (!target_task) return out;
  const auto target = tasks.find(*target_task);
  if (target == tasks.end()) return out;
  for (const auto& [id, skills] : tasks) {
    if (id == *target_task) continue;
    const bool shares = std::any_of(skills.begin(), skills.end(), [&](SkillId s) {
      return std::find(target->second.begin(), target->second.end(), s) != target->second.end();
    });
    if (shares) out.push_back(id);
  }
  return out;
}

json to_json(const GroundTruth& gt) {
  json labels = json::object();
  for (const auto& [id, l] : gt.labels) labels[id] = l;
  json tasks = json::object();
  for (const auto& [id, skills] : gt.tasks) tasks[std::to_string(id)] = skills;
  json traj_task = json::object();
  for (const auto& [id, task] : gt.trajectory_task) traj_task[id] = task;
  json j = {{"labels", std::move(labels)}, {"tasks", std::move(tasks)},
            {"trajectory_task", std::move(traj_task)}};
  j["target_task"] = gt.target_task ? json(*gt.target_task) : json(nullptr);
  return j;
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth gt;
  try {
    for (const auto& [id, l] : j.at("labels").items()) gt.labels[id] = l.get<std::vector<SkillId>>();
    for (const auto& [id, skills] : j.at("tasks").items()) {
      gt.tasks[std::stoi(id)] = skills.get<std::vector<SkillId>>();
    }
    if (j.contains("trajectory_task")) {
      for (const auto& [id, task] : j["trajectory_task"].items()) gt.trajectory_task[id] = task.get<TaskId>();
    }
    if (j.contains("target_task") && !j["target_task"].is_null()) {
      gt.target_task = j["target_task"].get<TaskId>();
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("ground truth: ") + e.what());
  }
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, file.string());
  out << to_json(gt).dump() << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, file.string());
}

GroundTruth load_ground_truth(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + file.string());
  try {
    return ground_truth_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("ground truth: ") + e.what());
  }
}

}  // namespace strap
