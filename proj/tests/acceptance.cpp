// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "strap/bench.hpp"
#include "strap/dtw.hpp"
#include "strap/parallel.hpp"
#include "strap/retrieval.hpp"
#include "strap/segmentation.hpp"
#include "strap/synth.hpp"
#include "test_util.hpp"

using namespace strap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Check {
 public:
  void require(bool cond, const std::string& what) {
    if (!cond && out_.ok) {
      out_.ok = false;
      out_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (out_.ok) out_.detail = s;
  }
  bool failed() const { return !out_.ok; }
  Outcome outcome() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Oracle equivalence.
Outcome oracle_equivalence() {
  Check c;
  static const double levels[] = {0.0, 0.5, 1.0, 2.0};
  for (std::uint64_t seed = 0; seed < 2000 && !c.failed(); ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> side(1, 6);
    std::uniform_int_distribution<int> pick(0, 3);
    const std::size_t n = side(rng), m = side(rng);
    CostMatrix cm(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) cm(i, j) = levels[pick(rng)];
    }
    const DtwResult d = dtw(cm), bd = brute_force_dtw(cm);
    const SubsequenceAlignment s = sdtw(cm), bs = brute_force_sdtw(cm);
    const std::string where = "seed " + std::to_string(seed);
    c.require(std::abs(d.cost - bd.cost) <= 1e-9, where + ": dtw cost");
    c.require(d.path == bd.path, where + ": dtw path");
    c.require(std::abs(s.cost - bs.cost) <= 1e-9, where + ": sdtw cost");
    c.require(s.path == bs.path && s.start == bs.start && s.end == bs.end, where + ": sdtw path");
  }
  c.note("2000 matrices, costs within 1e-9, identical paths");
  return c.outcome();
}

// 2. Exact slices are found at zero cost.
Outcome exact_slices() {
  Check c;
  for (std::uint64_t seed = 0; seed < 500 && !c.failed(); ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(20, 80), dim(4, 32);
    const std::size_t h = len(rng), e = dim(rng);
    const Matrix ref = testing::random_matrix(rng, h, e);
    std::uniform_int_distribution<std::size_t> start(0, h - 1);
    const std::size_t a = start(rng);
    std::uniform_int_distribution<std::size_t> end(a + 1, std::min(h, a + 30));
    const std::size_t b = end(rng);
    const SubsequenceAlignment s =
        sdtw(cost_matrix(ref.slice_rows(a, b), ref.view(), DistanceMetric::l2));
    const std::string where = "seed " + std::to_string(seed);
    c.require(s.cost == 0.0, where + ": nonzero cost");
    c.require(s.start == a && s.end == b, where + ": wrong bounds");
  }
  c.note("500 slices at cost 0 with exact bounds");
  return c.outcome();
}

Trajectory paused_walk(std::mt19937_64& rng, std::size_t h) {
  std::uniform_real_distribution<float> step(-0.05f, 0.05f);
  std::uniform_real_distribution<float> jitter(-0.0005f, 0.0005f);
  std::bernoulli_distribution toggle(0.08);
  Trajectory t = testing::random_trajectory(rng, "walk", h, 4, 3);
  bool moving = true;
  for (std::size_t r = 0; r < h; ++r) {
    if (toggle(rng)) moving = !moving;
    for (std::size_t col = 0; col < 3; ++col) {
      const float prev = r == 0 ? 0.0f : t.proprio(r - 1, col);
      t.proprio(r, col) = prev + (moving ? step(rng) : jitter(rng));
    }
  }
  return t;
}

// 3. Segmentation invariants plus the pause example.
Outcome segmentation_invariants() {
  Check c;
  for (std::uint64_t seed = 0; seed < 1000 && !c.failed(); ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(2, 400);
    const Trajectory t = paused_walk(rng, len(rng));
    const SegmentationConfig cfg{0.001 * static_cast<double>(seed % 11), 1 + seed % 40};
    const Segmentation s = segment_trajectory(t, cfg);
    const std::string where = "seed " + std::to_string(seed);
    c.require(!s.chunks.empty() && s.chunks.front().start == 0 && s.chunks.back().end == t.length(),
              where + ": coverage");
    for (std::size_t k = 0; k < s.chunks.size(); ++k) {
      c.require(s.chunks[k].length() >= std::min(cfg.min_len, t.length()), where + ": short chunk");
      if (k > 0) c.require(s.chunks[k].start == s.chunks[k - 1].end, where + ": gap or overlap");
    }
    c.require(segment_trajectory(t, cfg).chunks == s.chunks, where + ": nondeterministic");
  }
  const Trajectory ex = testing::trajectory_from_x("ex", {0, 0, 0, 1, 2, 3, 3, 3});
  const Segmentation s = segment_trajectory(ex, {0.5, 2});
  c.require(s.chunks == std::vector<SubTrajectoryRef>{{"ex", 0, 6}, {"ex", 6, 8}},
            "pause example");
  c.note("1000 trajectories partitioned; pause example gives [0,6),[6,8)");
  return c.outcome();
}

// 4. Uniform top-k allocation.
Outcome topk_uniformity() {
  Check c;
  c.require(RetrievalConfig{}.k == 100, "default k is not 100");
  std::size_t full_hundreds = 0;
  for (std::uint64_t seed = 0; seed < 200 && !c.failed(); ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> nq(1, 12), nc(0, 40);
    std::uniform_real_distribution<double> cost(0.0, 5.0);
    MatchTable t;
    const std::size_t queries = nq(rng);
    for (std::size_t q = 0; q < queries; ++q) {
      QueryCandidates qc;
      qc.query = {"t", q * 10, q * 10 + 10};
      const std::size_t n = nc(rng);
      std::vector<double> costs(n);
      for (double& v : costs) v = std::round(cost(rng) * 4) / 4;  // ties
      std::sort(costs.begin(), costs.end());
      for (std::size_t i = 0; i < n; ++i) {
        Candidate cand;
        cand.match = {"p" + std::to_string(i), q, q + 5, costs[i], {}, qc.query};
        qc.candidates.push_back(cand);
      }
      t.queries.push_back(qc);
    }
    const std::size_t k = seed % 2 == 0 ? 100 : 1 + seed % 150;
    const RetrievalResult r = select_top_k(t, k);
    const std::size_t supply = t.total_candidates();
    const std::string where = "seed " + std::to_string(seed);
    c.require(r.selected.size() == std::min(k, supply), where + ": total");
    c.require(r.exhausted == (supply < k), where + ": exhaustion flag");
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t q = 0; q < queries; ++q) {
      const std::size_t n = r.per_query_counts[q].count;
      hi = std::max(hi, n);
      if (n < t.queries[q].candidates.size()) lo = std::min(lo, n);
    }
    if (lo != SIZE_MAX) c.require(hi - lo <= 1, where + ": counts differ by more than 1");
    if (k == 100 && supply >= 100) {
      c.require(r.selected.size() == 100, where + ": k=100 not filled");
      ++full_hundreds;
    }
  }
  c.require(full_hundreds > 0, "no table exercised k=100 with enough supply");
  c.note("200 tables uniform; " + std::to_string(full_hundreds) + " filled k=100 exactly");
  return c.outcome();
}

// 5. Self-retrieval and export integrity.
Outcome self_retrieval() {
  Check c;
  testing::TempDir dir;
  std::size_t queries = 0;
  for (std::uint64_t seed = 0; seed < 3 && !c.failed(); ++seed) {
    SynthConfig sc;
    sc.noise_sigma = 0.0;
    sc.seed = seed;
    const SynthData data = generate_synthetic(sc);
    const Dataset& targets = data.target;
    RetrievalConfig cfg;
    cfg.segmentation = {calibrate_epsilon(targets), 20};
    const MatchTable table = match_all(targets, targets, cfg);
    for (const auto& q : table.queries) {
      const Match& best = q.candidates.front().match;
      const std::string where = "seed " + std::to_string(seed) + " " + q.query.trajectory_id;
      c.require(best.cost == 0.0, where + ": best cost is not 0");
      c.require(best.trajectory_id == q.query.trajectory_id && best.start == q.query.start &&
                    best.end == q.query.end,
                where + ": best match is not its own location");
      ++queries;
    }
    const RetrievalResult r = select_top_k(table, cfg.k);
    const fs::path out = dir / ("export" + std::to_string(seed));
    export_retrieval(r, targets, targets, out);
    const Dataset back = load_dataset(out);
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> dup;
    for (const Candidate& cand : r.selected) {
      const Match& m = cand.match;
      const Trajectory* s = back.find(slice_id(m.trajectory_id, m.start, m.end, dup[{m.trajectory_id, m.start, m.end}]++));
      const Trajectory& src = *targets.find(m.trajectory_id);
      c.require(s != nullptr && s->embeddings.bit_equal(src.embeddings.copy_rows(m.start, m.end)) &&
                    s->proprio.bit_equal(src.proprio.copy_rows(m.start, m.end)) &&
                    s->actions.bit_equal(src.actions.copy_rows(m.start, m.end)),
                "exported slice differs from source rows");
    }
    for (const Trajectory& t : targets.trajectories) {
      const Trajectory* copy = back.find(t.id);
      c.require(copy != nullptr && bit_equal(*copy, t), "target copy differs");
    }
  }
  c.note(std::to_string(queries) + " queries found themselves at cost 0; exports byte-identical");
  return c.outcome();
}

// 6. Sub-trajectory retrieval against both baselines.
Outcome granularity_ablation() {
  Check c;
  double strap = 0, full = 0, state = 0;
  std::size_t relevant = 0, total = 0;
  double worst_share = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig sc;
    sc.n_skills = 8;
    sc.tasks = 12;
    sc.skills_per_task = 2;
    sc.trajectories_per_task = 5;
    sc.embedding_dim = 16;
    sc.noise_sigma = 0.05;
    sc.warp_jitter = 0.2;
    sc.seed = seed;
    const MethodComparison m = compare_methods(generate_synthetic(sc), 100, 10, {-1.0, 20});
    strap += m.strap.precision_at_k / 10;
    full += m.full_trajectory.precision_at_k / 10;
    state += m.single_state.precision_at_k / 10;
    relevant += static_cast<std::size_t>(std::llround(m.strap.relevant_task_share * m.strap.retrieved_timesteps));
    total += m.strap.retrieved_timesteps;
    worst_share = std::min(worst_share, m.strap.relevant_task_share);
  }
  const double share = total > 0 ? static_cast<double>(relevant) / static_cast<double>(total) : 0.0;
  std::ostringstream s;
  s.precision(3);
  s << std::fixed << "precision strap " << strap << ", full_trajectory " << full << ", single_state "
    << state << "; relevant-task share " << share << " (worst seed " << worst_share << ")";
  c.require(strap >= 0.90, s.str());
  c.require(strap >= full + 0.05, s.str());
  c.require(strap >= state + 0.05, s.str());
  c.require(share >= 0.95, s.str());
  c.note(s.str());
  return c.outcome();
}

// 7. Linear scaling in prior size.
Outcome scaling() {
  Check c;
  const BenchReport r = run_benchmark(BenchConfig{});
  const auto ratios = scaling_ratios(r);
  std::ostringstream s;
  s.precision(3);
  s << "R^2 " << r.fit.r_squared << ", ratios";
  for (double v : ratios) s << ' ' << v;
  s << ", ms";
  for (const auto& row : r.rows) s << ' ' << std::llround(row.wall_ms_mean);
  c.require(r.fit.r_squared >= 0.98, s.str());
  for (double v : ratios) c.require(v >= 1.6 && v <= 2.4, s.str());
  c.note(s.str());
  return c.outcome();
}

// 8. Worker count does not change the output.
Outcome parallel_determinism() {
  Check c;
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<std::size_t> counts{1, 2, hw, std::max<std::size_t>(hw, 8)};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    BenchConfig cfg;
    cfg.seed = seed;
    const BenchWorkload w = make_bench_workload(cfg, 100);
    std::string first;
    for (std::size_t threads : counts) {
      const MatchTable t = match_queries(w.queries, w.target, w.prior, cfg.metric, threads);
      const std::string out = to_json(select_top_k(t, cfg.k)).dump();
      if (first.empty()) first = out;
      c.require(out == first, "seed " + std::to_string(seed) + ": output differs at " +
                                  std::to_string(threads) + " threads");
    }
  }
  c.note("seeds 0-2 identical for threads {1, 2, " + std::to_string(hw) + ", " +
         std::to_string(counts.back()) + "}");
  return c.outcome();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return files;
}

// 9. Dataset format round trip.
Outcome format_round_trip() {
  Check c;
  testing::TempDir dir;
  for (std::uint64_t seed = 0; seed < 100 && !c.failed(); ++seed) {
    std::mt19937_64 rng(seed);
    const Dataset d = testing::random_dataset(rng, seed % 6, 1 + seed % 20);
    const fs::path a = dir / ("a" + std::to_string(seed)), b = dir / ("b" + std::to_string(seed));
    write_dataset(d, a);
    const Dataset loaded = load_dataset(a);
    write_dataset(loaded, b);
    c.require(bit_equal(d, loaded), "seed " + std::to_string(seed) + ": load changed the data");
    c.require(tree(a) == tree(b), "seed " + std::to_string(seed) + ": rewritten files differ");
  }
  c.note("100 datasets rewritten byte-identically");
  return c.outcome();
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "subsequence semantics", 5, exact_slices},
      {3, "segmentation invariants", 0, segmentation_invariants},
      {4, "top-k uniformity", 0, topk_uniformity},
      {5, "self-retrieval", 0, self_retrieval},
      {6, "granularity ablation", 120, granularity_ablation},
      {7, "scaling benchmark", 600, scaling},
      {8, "determinism under parallelism", 0, parallel_determinism},
      {9, "format round trip", 0, format_round_trip},
  };
  int failures = 0;
  for (const Criterion& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0 && secs >= cr.limit_s) {
      o.ok = false;
      o.detail += " [over the " + fmt("%.0f", cr.limit_s) + " s limit]";
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s %d %s (%.2f s): %s\n", o.ok ? "PASS" : "FAIL", cr.id, cr.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
