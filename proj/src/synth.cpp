#include "strap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "strap/error.hpp"

namespace strap {

namespace {

// Distribution helpers over raw engine bits so output does not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)); }
  std::size_t integer(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct Skill {
  std::vector<std::size_t> anchors;  // pool indices
  std::size_t base_len = 0;
  std::size_t axis = 0;  // end-effector moves along one signed axis
  double sign = 1.0;
};

// Trapezoidal speed profile: ramps of `ramp` steps at both ends of a skill, so the slow
// steps around every skill boundary mirror each other.
double step_speed(std::size_t s, std::size_t len, std::size_t ramp, double cruise) {
  const double r = static_cast<double>(ramp);
  const double in = (static_cast<double>(s) + 0.5) / r;
  const double out = (static_cast<double>(len - s) - 0.5) / r;
  return cruise * std::min({1.0, in, out});
}

// Point on a piecewise-linear curve through `anchors` at parameter u in [0, 1].
void curve_point(const Matrix& pool, const std::vector<std::size_t>& anchors, double u,
                 std::span<float> out) {
  const std::size_t segments = anchors.size() - 1;
  const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(segments);
  const std::size_t seg = std::min(static_cast<std::size_t>(x), segments - 1);
  const double w = x - static_cast<double>(seg);
  const auto a = pool.row(anchors[seg]);
  const auto b = pool.row(anchors[seg + 1]);
  for (std::size_t e = 0; e < out.size(); ++e) {
    out[e] = static_cast<float>((1.0 - w) * a[e] + w * b[e]);
  }
}

std::vector<SkillId> random_composition(Rng& rng, std::size_t count,
                                        const std::vector<SkillId>& allowed,
                                        std::optional<SkillId> required) {
  std::vector<SkillId> pick;
  if (required) pick.push_back(*required);
  std::vector<SkillId> rest;
  for (SkillId s : allowed) {
    if (!required || s != *required) rest.push_back(s);
  }
  while (pick.size() < count) {
    const std::size_t i = rng.index(rest.size());
    pick.push_back(rest[i]);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
  }
  // Fisher-Yates so a forced skill is not always first.
  for (std::size_t i = pick.size(); i > 1; --i) std::swap(pick[i - 1], pick[rng.index(i)]);
  return pick;
}

std::string task_language(TaskId task, const std::vector<SkillId>& skills) {
  std::string s = "task " + std::to_string(task) + ":";
  for (std::size_t i = 0; i < skills.size(); ++i) {
    s += (i == 0 ? " " : ", then ");
    s += "skill " + std::to_string(skills[i]);
  }
  return s;
}

}  // namespace

void validate_synth_config(const SynthConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (cfg.n_skills < 1) fail("n_skills must be >= 1");
  if (cfg.skills_per_task < 1 || cfg.skills_per_task > cfg.n_skills) {
    fail("skills_per_task must lie in [1, n_skills]");
  }
  if (cfg.skill_len_min < 2 || cfg.skill_len_max < cfg.skill_len_min) {
    fail("skill_len range must satisfy 2 <= min <= max");
  }
  if (cfg.tasks < 1 || cfg.trajectories_per_task < 1) fail("tasks and trajectories_per_task must be >= 1");
  if (cfg.embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (!(cfg.warp_jitter >= 0.0 && cfg.warp_jitter < 1.0)) fail("warp_jitter must lie in [0, 1)");
  if (!(cfg.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (cfg.anchors_per_skill < 2) fail("anchors_per_skill must be >= 2");
  const std::size_t pool = cfg.anchor_pool == 0 ? cfg.n_skills : cfg.anchor_pool;
  if (pool < 2) fail("anchor pool must hold at least 2 points");
  if (cfg.shared_tasks > cfg.tasks) fail("shared_tasks exceeds tasks");
  if (cfg.skills_per_task > 1 && cfg.n_skills < cfg.skills_per_task + 1) {
    fail("need more skills than skills_per_task so prior tasks can differ from the target");
  }
  if (cfg.isolate_unshared && cfg.n_skills - cfg.skills_per_task < cfg.skills_per_task &&
      cfg.shared_tasks < cfg.tasks) {
    fail("too few non-target skills to build isolated tasks");
  }
  if (!(cfg.cruise_speed_m > 0.0) || !(cfg.frequency_hz > 0.0) || cfg.ramp_steps < 1) {
    fail("cruise_speed_m, ramp_steps and frequency_hz must be positive");
  }
}

SynthData generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  Rng rng(cfg.seed);
  const std::size_t e = cfg.embedding_dim;
  const std::size_t pool_size = cfg.anchor_pool == 0 ? cfg.n_skills : cfg.anchor_pool;

  Matrix pool(pool_size, e);
  for (std::size_t p = 0; p < pool_size; ++p) {
    for (float& v : pool.row(p)) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  std::vector<Skill> skills(cfg.n_skills);
  std::set<std::vector<std::size_t>> used_sequences;
  for (Skill& s : skills) {
    // Distinct anchor sequences; retries are bounded because the pool admits
    // pool * (pool-1)^(anchors-1) sequences.
    for (int attempt = 0;; ++attempt) {
      s.anchors.clear();
      s.anchors.push_back(rng.index(pool_size));
      while (s.anchors.size() < cfg.anchors_per_skill) {
        std::size_t next = rng.index(pool_size - 1);
        if (next >= s.anchors.back()) ++next;
        s.anchors.push_back(next);
      }
      if (used_sequences.insert(s.anchors).second || attempt > 1000) break;
    }
    s.base_len = rng.integer(cfg.skill_len_min, cfg.skill_len_max);
    const std::size_t dir = rng.index(6);
    s.axis = dir % 3;
    s.sign = dir < 3 ? 1.0 : -1.0;
  }

  std::vector<SkillId> all_skills(cfg.n_skills);
  for (std::size_t s = 0; s < cfg.n_skills; ++s) all_skills[s] = static_cast<SkillId>(s);

  GroundTruth truth;
  const auto target_task = static_cast<TaskId>(cfg.tasks);
  const std::vector<SkillId> target_skills =
      random_composition(rng, cfg.skills_per_task, all_skills, std::nullopt);
  auto is_target_skill = [&](SkillId s) {
    return std::find(target_skills.begin(), target_skills.end(), s) != target_skills.end();
  };
  auto covers_target = [&](const std::vector<SkillId>& comp) {
    return cfg.skills_per_task > 1 && std::all_of(target_skills.begin(), target_skills.end(), [&](SkillId s) {
             return std::find(comp.begin(), comp.end(), s) != comp.end();
           });
  };

  std::vector<SkillId> non_target;
  for (SkillId s : all_skills) {
    if (!is_target_skill(s)) non_target.push_back(s);
  }

  for (std::size_t task = 0; task < cfg.tasks; ++task) {
    std::vector<SkillId> comp;
    if (task < cfg.shared_tasks) {
      const SkillId forced = target_skills[task % target_skills.size()];
      std::vector<SkillId> allowed = non_target;
      allowed.push_back(forced);
      comp = random_composition(rng, cfg.skills_per_task, allowed, forced);
    } else if (cfg.isolate_unshared) {
      comp = random_composition(rng, cfg.skills_per_task, non_target, std::nullopt);
    } else {
      do {
        comp = random_composition(rng, cfg.skills_per_task, all_skills, std::nullopt);
      } while (covers_target(comp));
    }
    truth.tasks[static_cast<TaskId>(task)] = std::move(comp);
  }
  truth.tasks[target_task] = target_skills;
  truth.target_task = target_task;

  auto make_trajectory = [&](const std::string& id, TaskId task) {
    const std::vector<SkillId>& comp = truth.tasks.at(task);
    std::vector<std::size_t> lengths;
    for (SkillId s : comp) {
      const double scale = 1.0 + cfg.warp_jitter * rng.uniform(-1.0, 1.0);
      const auto len = static_cast<std::size_t>(std::lround(static_cast<double>(skills[s].base_len) * scale));
      lengths.push_back(std::clamp(len, cfg.skill_len_min, cfg.skill_len_max));
    }
    std::size_t h = 0;
    for (std::size_t l : lengths) h += l;

    Trajectory t;
    t.id = id;
    t.embeddings = Matrix(h, e);
    t.proprio = Matrix(h, 3);
    t.actions = Matrix(h, 3);
    t.language = task_language(task, comp);
    t.frequency_hz = cfg.frequency_hz;
    std::vector<SkillId>& labels = truth.labels[id];
    truth.trajectory_task[id] = task;

    double position[3] = {0.0, 0.0, 0.0};
    std::size_t row = 0;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const Skill& skill = skills[comp[k]];
      const std::size_t len = lengths[k];
      // Per-step speed jitter: cumulative progress normalised to end exactly at u = 1.
      std::vector<double> progress(len, 0.0);
      for (std::size_t s = 1; s < len; ++s) {
        progress[s] = progress[s - 1] + 1.0 + cfg.warp_jitter * rng.uniform(-1.0, 1.0);
      }
      const double total = progress.back();
      for (std::size_t s = 0; s < len; ++s, ++row) {
        const double u = total > 0 ? progress[s] / total : 0.0;
        auto emb = t.embeddings.row(row);
        curve_point(pool, skill.anchors, u, emb);
        if (cfg.noise_sigma > 0.0) {
          for (float& v : emb) v = static_cast<float>(v + cfg.noise_sigma * rng.normal());
        }
        for (std::size_t c = 0; c < 3; ++c) t.proprio(row, c) = static_cast<float>(position[c]);
        position[skill.axis] +=
            skill.sign * step_speed(s, len, cfg.ramp_steps, cfg.cruise_speed_m);
        labels.push_back(comp[k]);
      }
    }
    for (std::size_t r = 0; r + 1 < h; ++r) {
      for (std::size_t c = 0; c < 3; ++c) t.actions(r, c) = t.proprio(r + 1, c) - t.proprio(r, c);
    }
    return t;
  };

  SynthData data;
  data.prior.name = "synthetic-prior";
  data.prior.embedding_dim = e;
  data.prior.role = DatasetRole::prior;
  data.target.name = "synthetic-target";
  data.target.embedding_dim = e;
  data.target.role = DatasetRole::target;

  char id[32];
  std::size_t serial = 0;
  for (std::size_t task = 0; task < cfg.tasks; ++task) {
    for (std::size_t r = 0; r < cfg.trajectories_per_task; ++r) {
      std::snprintf(id, sizeof id, "p%04zu", serial++);
      data.prior.trajectories.push_back(make_trajectory(id, static_cast<TaskId>(task)));
    }
  }
  for (std::size_t r = 0; r < cfg.trajectories_per_task; ++r) {
    std::snprintf(id, sizeof id, "t%03zu", r);
    data.target.trajectories.push_back(make_trajectory(id, target_task));
  }
  data.truth = std::move(truth);
  return data;
}

}  // namespace strap
