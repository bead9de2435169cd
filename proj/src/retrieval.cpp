#include "strap/retrieval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "strap/error.hpp"
#include "strap/parallel.hpp"

namespace strap {

using nlohmann::json;

std::size_t MatchTable::total_candidates() const noexcept {
  std::size_t total = 0;
  for (const auto& q : queries) total += q.candidates.size();
  return total;
}

std::vector<SubTrajectoryRef> segment_targets(const Dataset& targets,
                                              const SegmentationConfig& cfg) {
  std::vector<SubTrajectoryRef> queries;
  for (const Trajectory& t : targets.trajectories) {
    Segmentation seg = segment_trajectory(t, cfg);
    queries.insert(queries.end(), seg.chunks.begin(), seg.chunks.end());
  }
  return queries;
}

MatchTable match_queries(std::span<const SubTrajectoryRef> queries, const Dataset& targets,
                         const Dataset& prior, DistanceMetric metric, std::size_t threads) {
  if (queries.empty() || targets.trajectories.empty()) {
    throw Error(ErrorCode::EmptyTarget, "no target queries");
  }
  if (prior.trajectories.empty()) throw Error(ErrorCode::EmptyPrior, "prior dataset is empty");
  if (targets.embedding_dim != prior.embedding_dim) {
    throw Error(ErrorCode::DimMismatch, "target embedding_dim " +
                                            std::to_string(targets.embedding_dim) +
                                            " vs prior " + std::to_string(prior.embedding_dim));
  }

  std::vector<MatrixView> query_views;
  query_views.reserve(queries.size());
  for (const SubTrajectoryRef& q : queries) {
    const Trajectory* t = targets.find(q.trajectory_id);
    if (t == nullptr) throw Error(ErrorCode::UnknownId, "query trajectory " + q.trajectory_id);
    if (q.start >= q.end || q.end > t->length()) {
      throw Error(ErrorCode::ShapeMismatch, "query range out of bounds for " + q.trajectory_id);
    }
    query_views.push_back(t->embeddings.slice_rows(q.start, q.end));
  }

  const std::size_t m = prior.trajectories.size();
  std::vector<Match> flat(queries.size() * m);
  parallel_for(flat.size(), threads == 0 ? default_thread_count() : threads, [&](std::size_t idx) {
    const std::size_t qi = idx / m;
    const Trajectory& ref = prior.trajectories[idx % m];
    SubsequenceAlignment a = sdtw(cost_matrix(query_views[qi], ref.embeddings.view(), metric));
    flat[idx] = Match{ref.id, a.start, a.end, a.cost, std::move(a.path), queries[qi]};
  });

  MatchTable table;
  table.queries.resize(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    QueryCandidates& entry = table.queries[qi];
    entry.query = queries[qi];
    entry.candidates.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      entry.candidates.push_back({std::move(flat[qi * m + j]), prior.trajectories[j].language});
    }
    std::stable_sort(entry.candidates.begin(), entry.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return std::tie(a.match.cost, a.match.trajectory_id, a.match.start) <
                              std::tie(b.match.cost, b.match.trajectory_id, b.match.start);
                     });
  }
  return table;
}

MatchTable match_all(const Dataset& targets, const Dataset& prior, const RetrievalConfig& cfg) {
  if (targets.trajectories.empty()) throw Error(ErrorCode::EmptyTarget, "target dataset is empty");
  const auto queries = segment_targets(targets, cfg.segmentation);
  return match_queries(queries, targets, prior, cfg.metric, cfg.threads);
}

RetrievalResult select_top_k(const MatchTable& table, std::size_t k, bool dedupe) {
  RetrievalResult result;
  result.config.k = k;
  result.config.dedupe = dedupe;
  const std::size_t nq = table.queries.size();
  for (const auto& q : table.queries) result.per_query_counts.push_back({q.query, 0});

  using Triple = std::tuple<std::string, std::size_t, std::size_t>;
  std::set<Triple> taken;
  std::vector<std::size_t> cursor(nq, 0);

  auto next_candidate = [&](std::size_t qi) -> const Candidate* {
    const auto& cands = table.queries[qi].candidates;
    if (dedupe) {
      while (cursor[qi] < cands.size()) {
        const Match& m = cands[cursor[qi]].match;
        if (!taken.contains({m.trajectory_id, m.start, m.end})) break;
        ++cursor[qi];
      }
    }
    return cursor[qi] < cands.size() ? &cands[cursor[qi]] : nullptr;
  };
  auto take = [&](std::size_t qi) {
    const Candidate& c = table.queries[qi].candidates[cursor[qi]++];
    taken.insert({c.match.trajectory_id, c.match.start, c.match.end});
    result.selected.push_back(c);
    ++result.per_query_counts[qi].count;
  };

  while (result.selected.size() < k) {
    std::vector<std::size_t> active;
    for (std::size_t qi = 0; qi < nq; ++qi) {
      if (next_candidate(qi) != nullptr) active.push_back(qi);
    }
    if (active.empty()) break;

    const std::size_t remaining = k - result.selected.size();
    if (active.size() > remaining) {
      std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
        return next_candidate(a)->match.cost < next_candidate(b)->match.cost;
      });
      active.resize(remaining);
    }
    for (std::size_t qi : active) {
      // With dedupe, a triple taken earlier in this round moves the cursor on.
      if (next_candidate(qi) == nullptr) continue;
      take(qi);
    }
  }
  result.exhausted = result.selected.size() < k;
  return result;
}

RetrievalResult retrieve(const Dataset& targets, const Dataset& prior,
                         const RetrievalConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorCode::ConfigInvalid, "k must be at least 1");
  RetrievalResult result = select_top_k(match_all(targets, prior, cfg), cfg.k, cfg.dedupe);
  result.config = cfg;
  return result;
}

std::string slice_id(const std::string& prior_id, std::size_t start, std::size_t end,
                     std::size_t dup_index) {
  return prior_id + "#" + std::to_string(start) + "-" + std::to_string(end) + "#" +
         std::to_string(dup_index);
}

Dataset build_retrieval_dataset(const RetrievalResult& result, const Dataset& targets,
                                const Dataset& prior) {
  if (!targets.trajectories.empty() && targets.embedding_dim != prior.embedding_dim) {
    throw Error(ErrorCode::DimMismatch, "target and prior embedding_dim differ");
  }
  Dataset out;
  out.name = prior.name + "+retrieval";
  out.embedding_dim = prior.embedding_dim != 0 ? prior.embedding_dim : targets.embedding_dim;
  out.role = DatasetRole::retrieval;

  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> dup_counts;
  for (const Candidate& c : result.selected) {
    const Match& m = c.match;
    const Trajectory* src = prior.find(m.trajectory_id);
    if (src == nullptr) throw Error(ErrorCode::StaleResult, "prior has no trajectory " + m.trajectory_id);
    if (m.start >= m.end || m.end > src->length()) {
      throw Error(ErrorCode::StaleResult, "slice [" + std::to_string(m.start) + "," +
                                              std::to_string(m.end) + ") outside " +
                                              m.trajectory_id);
    }
    if (!m.query.trajectory_id.empty() && targets.find(m.query.trajectory_id) == nullptr) {
      throw Error(ErrorCode::StaleResult, "targets have no trajectory " + m.query.trajectory_id);
    }
    const std::size_t dup = dup_counts[{m.trajectory_id, m.start, m.end}]++;
    Trajectory slice;
    slice.id = slice_id(m.trajectory_id, m.start, m.end, dup);
    slice.embeddings = src->embeddings.copy_rows(m.start, m.end);
    slice.proprio = src->proprio.copy_rows(m.start, m.end);
    slice.actions = src->actions.copy_rows(m.start, m.end);
    slice.language = src->language;
    slice.frequency_hz = src->frequency_hz;
    out.trajectories.push_back(std::move(slice));
  }
  for (const Trajectory& t : targets.trajectories) out.trajectories.push_back(t);
  return out;
}

Dataset export_retrieval(const RetrievalResult& result, const Dataset& targets,
                         const Dataset& prior, const std::filesystem::path& out_path) {
  Dataset out = build_retrieval_dataset(result, targets, prior);
  write_dataset(out, out_path);
  return out;
}

namespace {

json ref_json(const std::string& traj, std::size_t start, std::size_t end) {
  return {{"traj", traj}, {"start", start}, {"end", end}};
}

SubTrajectoryRef ref_from_json(const json& j) {
  try {
    return {j.at("traj").get<std::string>(), j.at("start").get<std::size_t>(),
            j.at("end").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("range: ") + e.what());
  }
}

}  // namespace

json to_json(const RetrievalResult& result) {
  json config = {{"k", result.config.k},
                 {"metric", metric_name(result.config.metric)},
                 {"epsilon", result.config.segmentation.epsilon},
                 {"min_len", result.config.segmentation.min_len},
                 {"dedupe", result.config.dedupe}};
  if (result.config.pad_h != 0) config["pad_h"] = result.config.pad_h;

  json matches = json::array();
  for (const Candidate& c : result.selected) {
    const Match& m = c.match;
    matches.push_back({{"query", ref_json(m.query.trajectory_id, m.query.start, m.query.end)},
                       {"prior", ref_json(m.trajectory_id, m.start, m.end)},
                       {"cost", m.cost},
                       {"language", c.language}});
  }
  json counts = json::array();
  for (const QueryCount& qc : result.per_query_counts) {
    counts.push_back({{"query", ref_json(qc.query.trajectory_id, qc.query.start, qc.query.end)},
                      {"count", qc.count}});
  }
  return {{"method", result.method},
          {"config", std::move(config)},
          {"matches", std::move(matches)},
          {"per_query_counts", std::move(counts)},
          {"exhausted", result.exhausted}};
}

RetrievalResult retrieval_result_from_json(const json& j) {
  RetrievalResult r;
  try {
    r.method = j.value("method", "strap");
    const json& cfg = j.at("config");
    r.config.k = cfg.at("k").get<std::size_t>();
    const auto metric = parse_metric(cfg.at("metric").get<std::string>());
    if (!metric) throw Error(ErrorCode::SchemaViolation, "config.metric");
    r.config.metric = *metric;
    r.config.segmentation.epsilon = cfg.at("epsilon").get<double>();
    r.config.segmentation.min_len = cfg.at("min_len").get<std::size_t>();
    r.config.dedupe = cfg.at("dedupe").get<bool>();
    r.config.pad_h = cfg.value("pad_h", std::size_t{0});
    for (const json& m : j.at("matches")) {
      Candidate c;
      c.match.query = ref_from_json(m.at("query"));
      const SubTrajectoryRef p = ref_from_json(m.at("prior"));
      c.match.trajectory_id = p.trajectory_id;
      c.match.start = p.start;
      c.match.end = p.end;
      c.match.cost = m.at("cost").get<double>();
      c.language = m.at("language").get<std::string>();
      r.selected.push_back(std::move(c));
    }
    for (const json& qc : j.at("per_query_counts")) {
      r.per_query_counts.push_back({ref_from_json(qc.at("query")), qc.at("count").get<std::size_t>()});
    }
    r.exhausted = j.value("exhausted", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("retrieval result: ") + e.what());
  }
  return r;
}

}  // namespace strap
