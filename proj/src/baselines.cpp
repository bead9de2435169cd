#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "strap/error.hpp"
#include "strap/parallel.hpp"
#include "strap/synth.hpp"

namespace strap {

using nlohmann::json;

namespace {

struct StateHit {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t target_traj = 0;
  std::size_t target_step = 0;
};

}  // namespace

RetrievalResult baseline_state_retrieval(const Dataset& targets, const Dataset& prior,
                                         std::size_t k, std::size_t pad_h, std::size_t threads) {
  if (pad_h < 1) throw Error(ErrorCode::ConfigInvalid, "pad_h must be >= 1");
  if (targets.trajectories.empty()) throw Error(ErrorCode::EmptyTarget, "target dataset is empty");
  if (prior.trajectories.empty()) throw Error(ErrorCode::EmptyPrior, "prior dataset is empty");
  if (targets.embedding_dim != prior.embedding_dim) {
    throw Error(ErrorCode::DimMismatch, "target and prior embedding_dim differ");
  }

  // Best target state for every prior state; ties keep the earliest target state.
  std::vector<std::vector<StateHit>> best(prior.trajectories.size());
  parallel_for(prior.trajectories.size(), threads == 0 ? default_thread_count() : threads,
               [&](std::size_t pi) {
                 const Trajectory& ref = prior.trajectories[pi];
                 auto& hits = best[pi];
                 hits.assign(ref.length(), StateHit{});
                 for (std::size_t ti = 0; ti < targets.trajectories.size(); ++ti) {
                   const Trajectory& tgt = targets.trajectories[ti];
                   const CostMatrix c = cost_matrix(tgt.embeddings.view(), ref.embeddings.view(),
                                                    DistanceMetric::one_minus_cosine);
                   for (std::size_t i = 0; i < c.rows(); ++i) {
                     for (std::size_t j = 0; j < c.cols(); ++j) {
                       if (c(i, j) < hits[j].cost) hits[j] = {c(i, j), ti, i};
                     }
                   }
                 }
               });

  struct Ranked {
    double cost;
    std::size_t prior_traj;
    std::size_t step;
  };
  std::vector<Ranked> ranked;
  for (std::size_t pi = 0; pi < best.size(); ++pi) {
    for (std::size_t j = 0; j < best[pi].size(); ++j) ranked.push_back({best[pi][j].cost, pi, j});
  }
  const std::size_t take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                    [](const Ranked& a, const Ranked& b) {
                      return std::tie(a.cost, a.prior_traj, a.step) < std::tie(b.cost, b.prior_traj, b.step);
                    });

  RetrievalResult result;
  result.method = "single_state";
  result.config.k = k;
  result.config.metric = DistanceMetric::one_minus_cosine;
  result.config.pad_h = pad_h;

  std::map<std::tuple<std::size_t, std::size_t>, std::size_t> query_index;
  for (std::size_t r = 0; r < take; ++r) {
    const Ranked& hit = ranked[r];
    const Trajectory& ref = prior.trajectories[hit.prior_traj];
    const StateHit& src = best[hit.prior_traj][hit.step];
    const Trajectory& tgt = targets.trajectories[src.target_traj];

    Candidate c;
    c.match.trajectory_id = ref.id;
    c.match.start = hit.step >= pad_h ? hit.step - pad_h : 0;
    c.match.end = std::min(ref.length(), hit.step + pad_h);
    c.match.cost = hit.cost;
    c.match.path = {{0, hit.step}};
    c.match.query = {tgt.id, src.target_step, src.target_step + 1};
    c.language = ref.language;
    result.selected.push_back(std::move(c));
    query_index.try_emplace({src.target_traj, src.target_step}, 0);
    ++query_index[{src.target_traj, src.target_step}];
  }
  for (const auto& [key, count] : query_index) {
    const auto& [ti, step] = key;
    result.per_query_counts.push_back({{targets.trajectories[ti].id, step, step + 1}, count});
  }
  result.exhausted = result.selected.size() < k;
  return result;
}

RetrievalResult baseline_full_trajectory(const Dataset& targets, const Dataset& prior,
                                         std::size_t k, DistanceMetric metric,
                                         std::size_t threads) {
  std::vector<SubTrajectoryRef> queries;
  for (const Trajectory& t : targets.trajectories) queries.push_back({t.id, 0, t.length()});
  if (queries.empty()) throw Error(ErrorCode::EmptyTarget, "target dataset is empty");
  RetrievalResult result = select_top_k(match_queries(queries, targets, prior, metric, threads), k);
  result.method = "full_trajectory";
  result.config.metric = metric;
  result.config.segmentation = {0.0, 1};
  return result;
}

EvalMetrics evaluate(const RetrievalResult& result, const GroundTruth& gt) {
  EvalMetrics m;
  m.empty = result.selected.empty();

  auto labels_of = [&](const std::string& id) -> const std::vector<SkillId>& {
    const auto it = gt.labels.find(id);
    if (it == gt.labels.end()) throw Error(ErrorCode::UnknownId, "no labels for " + id);
    return it->second;
  };
  const auto relevant = gt.tasks_sharing_target_skills();
  const std::set<TaskId> relevant_set(relevant.begin(), relevant.end());

  std::size_t agree = 0;
  std::size_t relevant_steps = 0;
  std::map<TaskId, std::size_t> per_task;
  for (const Candidate& c : result.selected) {
    const Match& match = c.match;
    const auto& qlabels = labels_of(match.query.trajectory_id);
    const auto& plabels = labels_of(match.trajectory_id);
    if (match.query.end > qlabels.size() || match.end > plabels.size()) {
      throw Error(ErrorCode::UnknownId, "range exceeds labels of " + match.trajectory_id);
    }

    // Majority skill of the query; ties go to the smallest skill id.
    std::map<SkillId, std::size_t> votes;
    for (std::size_t t = match.query.start; t < match.query.end; ++t) ++votes[qlabels[t]];
    SkillId majority = votes.begin()->first;
    for (const auto& [skill, n] : votes) {
      if (n > votes[majority]) majority = skill;
    }

    const std::size_t len = match.end - match.start;
    for (std::size_t t = match.start; t < match.end; ++t) agree += plabels[t] == majority;
    m.retrieved_timesteps += len;

    const auto task = gt.trajectory_task.find(match.trajectory_id);
    if (task != gt.trajectory_task.end()) {
      per_task[task->second] += len;
      if (relevant_set.contains(task->second)) relevant_steps += len;
    }
  }

  if (m.retrieved_timesteps > 0) {
    const double total = static_cast<double>(m.retrieved_timesteps);
    m.precision_at_k = static_cast<double>(agree) / total;
    m.relevant_task_share = static_cast<double>(relevant_steps) / total;
    for (const auto& [task, n] : per_task) m.task_shares[task] = static_cast<double>(n) / total;
  }
  m.task_sparsity = per_task.size();
  return m;
}

json to_json(const EvalMetrics& m) {
  json shares = json::object();
  for (const auto& [task, s] : m.task_shares) shares[std::to_string(task)] = s;
  return {{"precision_at_k", m.precision_at_k},
          {"task_sparsity", m.task_sparsity},
          {"relevant_task_share", m.relevant_task_share},
          {"retrieved_timesteps", m.retrieved_timesteps},
          {"empty", m.empty},
          {"task_shares", std::move(shares)}};
}

MethodComparison compare_methods(const SynthData& data, std::size_t k, std::size_t pad_h,
                                 SegmentationConfig seg, std::size_t threads) {
  if (seg.epsilon < 0.0) seg.epsilon = calibrate_epsilon(data.target);
  RetrievalConfig cfg;
  cfg.k = k;
  cfg.segmentation = seg;
  cfg.threads = threads;

  MethodComparison out;
  out.epsilon = seg.epsilon;
  out.strap = evaluate(retrieve(data.target, data.prior, cfg), data.truth);
  out.full_trajectory =
      evaluate(baseline_full_trajectory(data.target, data.prior, k, cfg.metric, threads), data.truth);
  out.single_state =
      evaluate(baseline_state_retrieval(data.target, data.prior, k, pad_h, threads), data.truth);
  return out;
}

}  // namespace strap
