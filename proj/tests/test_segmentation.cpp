#include <cmath>
#include <random>

#include "doctest.h"
#include "strap/error.hpp"
#include "strap/segmentation.hpp"
#include "test_util.hpp"

using namespace strap;

namespace {

std::vector<double> ref_speeds(const Matrix& p) {
  std::vector<double> out;
  for (std::size_t t = 0; t + 1 < p.rows(); ++t) {
    double sq = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = double(p(t + 1, c)) - double(p(t, c));
      sq += d * d;
    }
    out.push_back(std::sqrt(sq));
  }
  return out;
}

std::vector<bool> ref_transitions(const std::vector<double>& s, double eps) {
  const std::size_t h = s.size() + 1;
  std::vector<bool> mark(h, false);
  for (std::size_t t = 1; t + 1 < h; ++t) mark[t] = s[t - 1] < eps && s[t] < eps;
  return mark;
}

std::vector<std::size_t> ref_cuts(const std::vector<bool>& mark) {
  std::vector<std::size_t> cuts;
  std::size_t t = 0;
  while (t < mark.size()) {
    if (!mark[t]) {
      ++t;
      continue;
    }
    std::size_t u = t;
    while (u + 1 < mark.size() && mark[u + 1]) ++u;
    cuts.push_back((t + u) / 2);
    t = u + 1;
  }
  return cuts;
}

// Lengths-only merge loop; boundaries are rebuilt at the end.
std::vector<std::pair<std::size_t, std::size_t>> ref_merge(std::vector<std::size_t> lens,
                                                           std::size_t min_len) {
  while (lens.size() > 1) {
    std::size_t pick = lens.size();
    for (std::size_t k = 0; k < lens.size(); ++k) {
      if (lens[k] < min_len && (pick == lens.size() || lens[k] < lens[pick])) pick = k;
    }
    if (pick == lens.size()) break;
    std::size_t into;
    if (pick == 0) {
      into = 1;
    } else if (pick + 1 == lens.size()) {
      into = pick - 1;
    } else {
      into = lens[pick - 1] < lens[pick + 1] ? pick - 1 : pick + 1;
    }
    lens[into] += lens[pick];
    lens.erase(lens.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t at = 0;
  for (std::size_t l : lens) {
    out.emplace_back(at, at + l);
    at += l;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> ref_segment(const Matrix& p, double eps,
                                                             std::size_t min_len) {
  const std::vector<std::size_t> cuts = ref_cuts(ref_transitions(ref_speeds(p), eps));
  std::vector<std::size_t> lens;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    lens.push_back(c - prev);
    prev = c;
  }
  lens.push_back(p.rows() - prev);
  return ref_merge(lens, min_len);
}

std::vector<std::pair<std::size_t, std::size_t>> bounds(const std::vector<SubTrajectoryRef>& c) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& r : c) out.emplace_back(r.start, r.end);
  return out;
}

std::vector<SubTrajectoryRef> refs(const std::vector<std::pair<std::size_t, std::size_t>>& b) {
  std::vector<SubTrajectoryRef> out;
  for (auto [s, e] : b) out.push_back({"x", s, e});
  return out;
}

// Random walk with pauses: motion segments separated by near-stationary stretches.
Trajectory paused_walk(std::mt19937_64& rng, std::size_t h) {
  std::uniform_real_distribution<float> step(-0.05f, 0.05f);
  std::uniform_real_distribution<float> jitter(-0.0005f, 0.0005f);
  std::bernoulli_distribution toggle(0.08);
  Trajectory t = testing::random_trajectory(rng, "walk", h, 4, 5);
  bool moving = true;
  for (std::size_t r = 0; r < h; ++r) {
    if (toggle(rng)) moving = !moving;
    for (std::size_t c = 0; c < 3; ++c) {
      const float prev = r == 0 ? 0.0f : t.proprio(r - 1, c);
      t.proprio(r, c) = prev + (moving ? step(rng) : jitter(rng));
    }
  }
  return t;
}

}  // namespace

TEST_SUITE("segmentation") {

TEST_CASE("speed examples") {
  const Matrix p(3, 3, {0, 0, 0, 0, 0, 0, 1, 0, 0});
  CHECK(compute_speeds(p) == std::vector<double>{0.0, 1.0});

  const Matrix still(5, 4, 2.5f);
  CHECK(compute_speeds(still) == std::vector<double>(4, 0.0));

  Matrix diag(6, 3);
  for (std::size_t t = 0; t < 6; ++t) {
    diag(t, 0) = 3.0f * t;
    diag(t, 1) = 4.0f * t;
  }
  const auto s = compute_speeds(diag);
  const auto oracle = ref_speeds(diag);
  REQUIRE(s.size() == 5);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(oracle[t] == 5.0);
    CHECK(s[t] == oracle[t]);
  }
}

TEST_CASE("speed errors") {
  try {
    compute_speeds(Matrix(1, 3));
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooShort);
  }
  try {
    compute_speeds(Matrix(4, 2));
    FAIL("expected TooFewProprioColumns");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewProprioColumns);
  }
}

TEST_CASE("pause example") {
  const Trajectory t = testing::trajectory_from_x("ex", {0, 0, 0, 1, 2, 3, 3, 3});
  CHECK(compute_speeds(t.proprio) == std::vector<double>{0, 0, 1, 1, 1, 0, 0});
  CHECK(transition_cuts(compute_speeds(t.proprio), 0.5) == std::vector<std::size_t>{1, 6});
  const Segmentation s = segment_trajectory(t, {0.5, 2});
  CHECK(s.trajectory_id == "ex");
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 6}, {6, 8}};
  CHECK(bounds(s.chunks) == expected);
  CHECK(ref_segment(t.proprio, 0.5, 2) == expected);
}

TEST_CASE("no transitions means one chunk") {
  const Trajectory moving = testing::trajectory_from_x("m", {0, 1, 2, 3, 4, 5});
  CHECK(bounds(segment_trajectory(moving, {0.5, 1}).chunks) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 6}});
  const Trajectory still = testing::trajectory_from_x("s", {0, 0, 0, 0, 0});
  CHECK(bounds(segment_trajectory(still, {0.0, 1}).chunks) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 5}});
}

TEST_CASE("runs collapse to their floor midpoint") {
  const std::vector<double> s{1, 0, 0, 0, 0, 1, 1, 0, 0, 1};
  // interior transitions: 2,3,4 and 8
  CHECK(transition_cuts(s, 0.5) == std::vector<std::size_t>{3, 8});
  CHECK(transition_cuts(std::vector<double>{0, 0, 0, 0}, 0.5) == std::vector<std::size_t>{2});
}

TEST_CASE("merge examples") {
  SUBCASE("already long enough") {
    const auto in = refs({{0, 20}, {20, 45}, {45, 70}});
    CHECK(merge_short_chunks(in, 20, 70) == in);
  }
  SUBCASE("short ends fold inward") {
    const auto out = merge_short_chunks(refs({{0, 1}, {1, 30}, {30, 31}}), 20, 31);
    CHECK(bounds(out) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 31}});
  }
  SUBCASE("single short chunk is left alone") {
    const auto out = merge_short_chunks(refs({{0, 5}}), 20, 5);
    CHECK(bounds(out) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 5}});
  }
  SUBCASE("equal neighbours go right") {
    const auto out = merge_short_chunks(refs({{0, 10}, {10, 12}, {12, 22}}), 5, 22);
    CHECK(bounds(out) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 10}, {10, 22}});
  }
  SUBCASE("shorter neighbour wins") {
    const auto out = merge_short_chunks(refs({{0, 8}, {8, 10}, {10, 22}}), 5, 22);
    CHECK(bounds(out) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 10}, {10, 22}});
  }
}

TEST_CASE("bad configs") {
  const Trajectory t = testing::trajectory_from_x("c", {0, 1, 2});
  CHECK_THROWS_AS(segment_trajectory(t, {-1.0, 5}), Error);
  CHECK_THROWS_AS(segment_trajectory(t, {0.1, 0}), Error);
  const Trajectory one = testing::trajectory_from_x("o", {0});
  CHECK_THROWS_AS(segment_trajectory(one, {0.1, 1}), Error);
}

TEST_CASE("matches the step-by-step oracle on random walks") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(2, 200);
    const Trajectory t = paused_walk(rng, len(rng));
    const double eps = std::vector<double>{0.0, 0.001, 0.01, 0.03, 1.0}[seed % 5];
    const std::size_t min_len = 1 + seed % 25;
    const Segmentation s = segment_trajectory(t, {eps, min_len});
    INFO("seed " << seed);
    REQUIRE(bounds(s.chunks) == ref_segment(t.proprio, eps, min_len));
  }
}

TEST_CASE("partition, minimum length and determinism") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_int_distribution<std::size_t> len(2, 300);
    const Trajectory t = paused_walk(rng, len(rng));
    const SegmentationConfig cfg{0.002 * (seed % 7), 1 + seed % 40};
    const Segmentation s = segment_trajectory(t, cfg);
    REQUIRE_FALSE(s.chunks.empty());
    CHECK(s.chunks.front().start == 0);
    CHECK(s.chunks.back().end == t.length());
    for (std::size_t k = 0; k < s.chunks.size(); ++k) {
      CHECK(s.chunks[k].trajectory_id == t.id);
      CHECK(s.chunks[k].length() >= std::min(cfg.min_len, t.length()));
      if (k > 0) CHECK(s.chunks[k].start == s.chunks[k - 1].end);
    }
    CHECK(segment_trajectory(t, cfg).chunks == s.chunks);
  }
}

TEST_CASE("raising the threshold only adds transition states") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    const Trajectory t = paused_walk(rng, 120);
    const auto speeds = compute_speeds(t.proprio);
    std::vector<bool> prev = ref_transitions(speeds, 0.0);
    for (double eps : {0.0005, 0.001, 0.005, 0.02, 0.05, 0.2}) {
      const std::vector<bool> cur = ref_transitions(speeds, eps);
      for (std::size_t k = 0; k < cur.size(); ++k) {
        if (prev[k]) REQUIRE(cur[k]);
      }
      // Every cut sits on a transition state of its threshold.
      for (std::size_t c : transition_cuts(speeds, eps)) REQUIRE(cur[c]);
      CHECK(transition_cuts(speeds, eps) == ref_cuts(cur));
      prev = cur;
    }
  }
}

TEST_CASE("a larger threshold can join two pauses into one cut") {
  const std::vector<double> s{0, 0, 0.3, 0, 0};
  CHECK(transition_cuts(s, 0.1).size() == 2);
  CHECK(transition_cuts(s, 0.5).size() == 1);
}

TEST_CASE("epsilon calibration picks the requested quantile") {
  Dataset d;
  d.embedding_dim = 4;
  d.trajectories.push_back(testing::trajectory_from_x("a", {0, 1, 3, 6, 10, 15}));  // 1..5
  d.trajectories.push_back(testing::trajectory_from_x("b", {0, 6, 13, 21, 30, 40}));  // 6..10
  CHECK(calibrate_epsilon(d, 0.0) == 1.0);
  CHECK(calibrate_epsilon(d, 1.0) == 10.0);
  CHECK(calibrate_epsilon(d, 0.5) == 5.0);  // floor(0.5 * 9) = 4
  CHECK(calibrate_epsilon(d) == 1.0);
}

}  // TEST_SUITE
