#include "strap/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "strap/error.hpp"

namespace strap {

namespace {

// Two 8-wide accumulators per row. Every kernel below sums a given (a, b) pair with the
// same per-lane operation order, so blocked and single-pair distances agree bit for bit.
using f32x8 = float __attribute__((vector_size(32)));
constexpr std::size_t kBlock = 16;

inline f32x8 load8(const float* p) {
  f32x8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline double reduce(const f32x8& lo, const f32x8& hi) {
  double total = 0.0;
  for (int l = 0; l < 8; ++l) total += lo[l];
  for (int l = 0; l < 8; ++l) total += hi[l];
  return total;
}

double squared_l2_tail(const float* a, const float* b, std::size_t from, std::size_t e) {
  double total = 0.0;
  for (std::size_t k = from; k < e; ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    total += d * d;
  }
  return total;
}

double squared_l2(const float* a, const float* b, std::size_t e) {
  f32x8 lo{}, hi{};
  std::size_t k = 0;
  for (; k + kBlock <= e; k += kBlock) {
    const f32x8 d0 = load8(a + k) - load8(b + k);
    const f32x8 d1 = load8(a + k + 8) - load8(b + k + 8);
    lo += d0 * d0;
    hi += d1 * d1;
  }
  return reduce(lo, hi) + squared_l2_tail(a, b, k, e);
}

// One query row against four consecutive reference rows (row stride e).
void squared_l2_x4(const float* a, const float* b, std::size_t e, double* out) {
  f32x8 lo[4]{}, hi[4]{};
  std::size_t k = 0;
  for (; k + kBlock <= e; k += kBlock) {
    const f32x8 x0 = load8(a + k);
    const f32x8 x1 = load8(a + k + 8);
    for (std::size_t r = 0; r < 4; ++r) {
      const f32x8 d0 = x0 - load8(b + r * e + k);
      const f32x8 d1 = x1 - load8(b + r * e + k + 8);
      lo[r] += d0 * d0;
      hi[r] += d1 * d1;
    }
  }
  for (std::size_t r = 0; r < 4; ++r) out[r] = reduce(lo[r], hi[r]) + squared_l2_tail(a, b + r * e, k, e);
}

double dot(const float* a, const float* b, std::size_t e) {
  f32x8 lo{}, hi{};
  std::size_t k = 0;
  for (; k + kBlock <= e; k += kBlock) {
    lo += load8(a + k) * load8(b + k);
    hi += load8(a + k + 8) * load8(b + k + 8);
  }
  double total = reduce(lo, hi);
  for (; k < e; ++k) total += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  return total;
}

double cosine_distance(double ab, double aa, double bb) {
  const double value = 1.0 - ab / std::sqrt(aa * bb);
  return std::clamp(value, 0.0, 2.0);
}

// Index of the cheapest DP predecessor of (i, j), i > 0 and j > 0; ties go diagonal,
// then vertical, then horizontal.
PathStep best_predecessor(const std::vector<double>& acc, std::size_t m, std::size_t i,
                          std::size_t j) {
  PathStep best{i - 1, j - 1};
  double best_value = acc[(i - 1) * m + (j - 1)];
  if (acc[(i - 1) * m + j] < best_value) {
    best = {i - 1, j};
    best_value = acc[(i - 1) * m + j];
  }
  if (acc[i * m + (j - 1)] < best_value) best = {i, j - 1};
  return best;
}

void require_valid(const CostMatrix& c) {
  if (c.rows() < 1 || c.cols() < 1) {
    throw Error(ErrorCode::EmptyInput, "cost matrix must be at least 1x1");
  }
}

}  // namespace

std::string_view metric_name(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::l2: return "l2";
    case DistanceMetric::one_minus_cosine: return "one_minus_cosine";
  }
  return "l2";
}

std::optional<DistanceMetric> parse_metric(std::string_view name) {
  if (name == "l2") return DistanceMetric::l2;
  if (name == "one_minus_cosine" || name == "cosine") return DistanceMetric::one_minus_cosine;
  return std::nullopt;
}

double distance(std::span<const float> a, std::span<const float> b, DistanceMetric metric) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (metric == DistanceMetric::l2) return std::sqrt(squared_l2(a.data(), b.data(), a.size()));
  const double aa = dot(a.data(), a.data(), a.size());
  const double bb = dot(b.data(), b.data(), b.size());
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return cosine_distance(dot(a.data(), b.data(), a.size()), aa, bb);
}

CostMatrix cost_matrix(const MatrixView& query, const MatrixView& reference,
                       DistanceMetric metric) {
  if (query.cols() != reference.cols()) {
    throw Error(ErrorCode::DimMismatch, "query width " + std::to_string(query.cols()) +
                                            " vs reference width " +
                                            std::to_string(reference.cols()));
  }
  const std::size_t n = query.rows();
  const std::size_t m = reference.rows();
  const std::size_t e = query.cols();
  CostMatrix c(n, m);

  if (metric == DistanceMetric::l2) {
    // Reference blocks outermost so four reference rows stay cached across the query.
    double sq[4];
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
      for (std::size_t i = 0; i < n; ++i) {
        squared_l2_x4(query.row(i).data(), reference.row(j).data(), e, sq);
        for (std::size_t r = 0; r < 4; ++r) c(i, j + r) = std::sqrt(sq[r]);
      }
    }
    for (; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        c(i, j) = std::sqrt(squared_l2(query.row(i).data(), reference.row(j).data(), e));
      }
    }
    return c;
  }

  std::vector<double> query_norms(n);
  std::vector<double> ref_norms(m);
  for (std::size_t i = 0; i < n; ++i) {
    query_norms[i] = dot(query.row(i).data(), query.row(i).data(), e);
    if (query_norms[i] == 0.0) {
      throw Error(ErrorCode::ZeroVector, "query row " + std::to_string(i) + " is zero");
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    ref_norms[j] = dot(reference.row(j).data(), reference.row(j).data(), e);
    if (ref_norms[j] == 0.0) {
      throw Error(ErrorCode::ZeroVector, "reference row " + std::to_string(j) + " is zero");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const float* q = query.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      c(i, j) = cosine_distance(dot(q, reference.row(j).data(), e), query_norms[i], ref_norms[j]);
    }
  }
  return c;
}

DtwResult dtw(const CostMatrix& c) {
  require_valid(c);
  const std::size_t n = c.rows();
  const std::size_t m = c.cols();
  std::vector<double> acc(n * m);

  acc[0] = c(0, 0);
  for (std::size_t j = 1; j < m; ++j) acc[j] = acc[j - 1] + c(0, j);
  for (std::size_t i = 1; i < n; ++i) {
    acc[i * m] = acc[(i - 1) * m] + c(i, 0);
    for (std::size_t j = 1; j < m; ++j) {
      const double prev = std::min({acc[(i - 1) * m + (j - 1)], acc[(i - 1) * m + j],
                                    acc[i * m + (j - 1)]});
      acc[i * m + j] = c(i, j) + prev;
    }
  }

  DtwResult result;
  result.cost = acc[n * m - 1];
  PathStep cur{n - 1, m - 1};
  result.path.push_back(cur);
  while (cur.i > 0 || cur.j > 0) {
    if (cur.i == 0) {
      --cur.j;
    } else if (cur.j == 0) {
      --cur.i;
    } else {
      cur = best_predecessor(acc, m, cur.i, cur.j);
    }
    result.path.push_back(cur);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

SubsequenceAlignment sdtw(const CostMatrix& c) {
  require_valid(c);
  const std::size_t n = c.rows();
  const std::size_t m = c.cols();
  std::vector<double> acc(n * m);

  for (std::size_t j = 0; j < m; ++j) acc[j] = c(0, j);
  for (std::size_t i = 1; i < n; ++i) {
    acc[i * m] = acc[(i - 1) * m] + c(i, 0);
    for (std::size_t j = 1; j < m; ++j) {
      const double prev = std::min({acc[(i - 1) * m + (j - 1)], acc[(i - 1) * m + j],
                                    acc[i * m + (j - 1)]});
      acc[i * m + j] = c(i, j) + prev;
    }
  }

  const double* last_row = acc.data() + (n - 1) * m;
  std::size_t end_col = 0;
  for (std::size_t j = 1; j < m; ++j) {
    if (last_row[j] < last_row[end_col]) end_col = j;
  }

  SubsequenceAlignment result;
  result.cost = last_row[end_col];
  PathStep cur{n - 1, end_col};
  result.path.push_back(cur);
  while (cur.i > 0) {
    if (cur.j == 0) {
      --cur.i;
    } else {
      cur = best_predecessor(acc, m, cur.i, cur.j);
    }
    result.path.push_back(cur);
  }
  std::reverse(result.path.begin(), result.path.end());
  result.start = result.path.front().j;
  result.end = end_col + 1;
  return result;
}

namespace {

// Depth-first enumeration of every admissible path ending at `tail.back()`, walking
// backwards in the tie-break order diagonal, vertical, horizontal. The first path seen
// at a given minimum cost is kept, which is the path the greedy backtrack produces.
class PathEnumerator {
 public:
  PathEnumerator(const CostMatrix& c, bool subsequence) : c_(c), subsequence_(subsequence) {}

  void run_from(PathStep end) {
    tail_.assign(1, end);
    visit();
  }

  bool found() const noexcept { return !best_path_.empty(); }
  double best_cost() const noexcept { return best_cost_; }
  const WarpPath& best_path() const noexcept { return best_path_; }

 private:
  void visit() {
    const PathStep cur = tail_.back();
    const bool at_start = subsequence_ ? cur.i == 0 : (cur.i == 0 && cur.j == 0);
    if (at_start) {
      // Same left-to-right summation order as the forward recurrence.
      double total = 0.0;
      for (auto it = tail_.rbegin(); it != tail_.rend(); ++it) total += c_(it->i, it->j);
      if (!found() || total < best_cost_) {
        best_cost_ = total;
        best_path_.assign(tail_.rbegin(), tail_.rend());
      }
      return;
    }
    if (cur.i > 0 && cur.j > 0) step({cur.i - 1, cur.j - 1});
    if (cur.i > 0) step({cur.i - 1, cur.j});
    // Row 0 of the subsequence recurrence has no horizontal predecessor.
    if (cur.j > 0 && !(subsequence_ && cur.i == 0)) step({cur.i, cur.j - 1});
  }

  void step(PathStep next) {
    tail_.push_back(next);
    visit();
    tail_.pop_back();
  }

  const CostMatrix& c_;
  bool subsequence_;
  WarpPath tail_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  WarpPath best_path_;
};

void require_brute_force_size(const CostMatrix& c) {
  require_valid(c);
  if (c.rows() > kBruteForceMaxSide || c.cols() > kBruteForceMaxSide) {
    throw Error(ErrorCode::SizeBound, std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                                          " exceeds " + std::to_string(kBruteForceMaxSide) + "x" +
                                          std::to_string(kBruteForceMaxSide));
  }
}

}  // namespace

DtwResult brute_force_dtw(const CostMatrix& c) {
  require_brute_force_size(c);
  PathEnumerator search(c, false);
  search.run_from({c.rows() - 1, c.cols() - 1});
  return {search.best_cost(), search.best_path()};
}

SubsequenceAlignment brute_force_sdtw(const CostMatrix& c) {
  require_brute_force_size(c);
  SubsequenceAlignment best;
  bool have = false;
  for (std::size_t end = 0; end < c.cols(); ++end) {
    PathEnumerator search(c, true);
    search.run_from({c.rows() - 1, end});
    if (!have || search.best_cost() < best.cost) {
      best.cost = search.best_cost();
      best.path = search.best_path();
      best.start = best.path.front().j;
      best.end = end + 1;
      have = true;
    }
  }
  return best;
}

double path_cost(const CostMatrix& c, const WarpPath& path) {
  double total = 0.0;
  for (const PathStep& s : path) total += c(s.i, s.j);
  return total;
}

bool is_continuous_monotone(const WarpPath& path) {
  for (std::size_t k = 1; k < path.size(); ++k) {
    const std::size_t di = path[k].i - path[k - 1].i;
    const std::size_t dj = path[k].j - path[k - 1].j;
    if (path[k].i < path[k - 1].i || path[k].j < path[k - 1].j) return false;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

}  // namespace strap
