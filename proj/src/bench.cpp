#include "strap/bench.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "strap/error.hpp"
#include "strap/retrieval.hpp"

namespace strap {

using nlohmann::json;

namespace {

// splitmix64 finaliser, used to derive independent per-trajectory streams.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Trajectory random_trajectory(const std::string& id, std::size_t len, std::size_t e,
                             std::uint64_t stream) {
  std::mt19937_64 rng(stream);
  auto draw = [&] { return static_cast<float>(static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0); };
  Trajectory t;
  t.id = id;
  t.embeddings = Matrix(len, e);
  for (std::size_t k = 0; k < t.embeddings.size(); ++k) t.embeddings.data()[k] = draw();
  t.proprio = Matrix(len, 3);
  for (std::size_t r = 1; r < len; ++r) {
    for (std::size_t c = 0; c < 3; ++c) t.proprio(r, c) = t.proprio(r - 1, c) + 0.01f * draw();
  }
  t.actions = Matrix(len, 1);
  t.language = "benchmark";
  return t;
}

void validate_bench_config(const BenchConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (cfg.trials < 3) fail("trials must be >= 3");
  if (cfg.sizes.size() < 2) fail("need at least two prior sizes");
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] == 0) fail("prior size must be positive");
    if (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1]) fail("prior sizes must be strictly increasing");
  }
  if (cfg.chunks < 1 || cfg.chunk_len < 1 || cfg.chunks * cfg.chunk_len > cfg.traj_len) {
    fail("chunks * chunk_len must fit in traj_len");
  }
  if (cfg.traj_len < 2 || cfg.embedding_dim < 1 || cfg.k < 1) fail("degenerate workload shape");
}

}  // namespace

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::ConfigInvalid, "fit_line needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::ConfigInvalid, "fit_line needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
  return fit;
}

void grow_bench_prior(BenchWorkload& w, const BenchConfig& cfg, std::size_t prior_size) {
  char id[32];
  for (std::size_t i = w.prior.trajectories.size(); i < prior_size; ++i) {
    std::snprintf(id, sizeof id, "p%06zu", i);
    w.prior.trajectories.push_back(
        random_trajectory(id, cfg.traj_len, cfg.embedding_dim, mix(cfg.seed * 0x100000001b3ull + i + 1)));
  }
}

BenchWorkload make_bench_workload(const BenchConfig& cfg, std::size_t prior_size) {
  BenchWorkload w;
  w.target.name = "bench-target";
  w.target.role = DatasetRole::target;
  w.target.embedding_dim = cfg.embedding_dim;
  w.target.trajectories.push_back(random_trajectory("target", cfg.traj_len, cfg.embedding_dim, mix(~cfg.seed)));
  for (std::size_t c = 0; c < cfg.chunks; ++c) {
    w.queries.push_back({"target", c * cfg.chunk_len, (c + 1) * cfg.chunk_len});
  }
  w.prior.name = "bench-prior";
  w.prior.role = DatasetRole::prior;
  w.prior.embedding_dim = cfg.embedding_dim;
  grow_bench_prior(w, cfg, prior_size);
  return w;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  validate_bench_config(cfg);
  BenchReport report;
  report.config = cfg;
  BenchWorkload w = make_bench_workload(cfg, 0);

  using clock = std::chrono::steady_clock;
  for (std::size_t size : cfg.sizes) {
    grow_bench_prior(w, cfg, size);
    auto run_once = [&] {
      const MatchTable table = match_queries(w.queries, w.target, w.prior, cfg.metric, cfg.threads);
      return select_top_k(table, cfg.k).selected.size();
    };
    run_once();  // warm-up

    BenchRow row;
    row.prior_size = size;
    row.total_prior_timesteps = w.prior.total_timesteps();
    row.trials = cfg.trials;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto begin = clock::now();
      run_once();
      row.samples_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - begin).count());
    }
    const double n = static_cast<double>(row.samples_ms.size());
    row.wall_ms_mean = std::accumulate(row.samples_ms.begin(), row.samples_ms.end(), 0.0) / n;
    double var = 0.0;
    for (double s : row.samples_ms) var += (s - row.wall_ms_mean) * (s - row.wall_ms_mean);
    row.wall_ms_std = std::sqrt(var / (n - 1.0));
    report.rows.push_back(std::move(row));
  }

  std::vector<double> xs, ys;
  for (const BenchRow& r : report.rows) {
    xs.push_back(static_cast<double>(r.prior_size));
    ys.push_back(r.wall_ms_mean);
  }
  report.fit = fit_line(xs, ys);
  return report;
}

std::vector<double> scaling_ratios(const BenchReport& report) {
  std::vector<double> out;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    out.push_back(report.rows[i].wall_ms_mean / report.rows[i - 1].wall_ms_mean);
  }
  return out;
}

json to_json(const BenchReport& report) {
  json rows = json::array();
  for (const BenchRow& r : report.rows) {
    rows.push_back({{"prior_size", r.prior_size},
                    {"total_prior_timesteps", r.total_prior_timesteps},
                    {"wall_ms_mean", r.wall_ms_mean},
                    {"wall_ms_std", r.wall_ms_std},
                    {"trials", r.trials},
                    {"samples_ms", r.samples_ms}});
  }
  const BenchConfig& c = report.config;
  return {{"config",
           {{"sizes", c.sizes},
            {"traj_len", c.traj_len},
            {"chunks", c.chunks},
            {"chunk_len", c.chunk_len},
            {"embedding_dim", c.embedding_dim},
            {"trials", c.trials},
            {"k", c.k},
            {"metric", metric_name(c.metric)},
            {"seed", c.seed},
            {"threads", c.threads}}},
          {"rows", std::move(rows)},
          {"fit",
           {{"slope_ms_per_trajectory", report.fit.slope},
            {"intercept_ms", report.fit.intercept},
            {"r_squared", report.fit.r_squared}}},
          {"scaling_ratios", scaling_ratios(report)}};
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "prior_size,total_prior_timesteps,wall_ms_mean,wall_ms_std,trials\n";
  for (const BenchRow& r : report.rows) {
    out << r.prior_size << ',' << r.total_prior_timesteps << ',' << r.wall_ms_mean << ','
        << r.wall_ms_std << ',' << r.trials << '\n';
  }
  return out.str();
}

}  // namespace strap
