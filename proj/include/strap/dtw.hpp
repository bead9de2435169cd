#pragma once

#include <cstddef>
#include <string_view>
#include <optional>
#include <vector>

#include "strap/dataset.hpp"
#include "strap/matrix.hpp"

namespace strap {

enum class DistanceMetric { l2, one_minus_cosine };

std::string_view metric_name(DistanceMetric metric);
std::optional<DistanceMetric> parse_metric(std::string_view name);

/// Dense n x m matrix of pairwise distances between query rows and reference rows.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t n, std::size_t m, double fill = 0.0)
      : n_(n), m_(m), values_(n * m, fill) {}
  CostMatrix(std::size_t n, std::size_t m, std::vector<double> values)
      : n_(n), m_(m), values_(std::move(values)) {}

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return m_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * m_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * m_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
};

struct PathStep {
  std::size_t i = 0;  // query index
  std::size_t j = 0;  // reference index
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

using WarpPath = std::vector<PathStep>;

struct DtwResult {
  double cost = 0.0;
  WarpPath path;
};

/// Best alignment of the whole query to reference columns [start, end).
struct SubsequenceAlignment {
  std::size_t start = 0;
  std::size_t end = 0;
  double cost = 0.0;
  WarpPath path;
};

/// One S-DTW result between a query chunk and a prior trajectory.
struct Match {
  std::string trajectory_id;
  std::size_t start = 0;
  std::size_t end = 0;
  double cost = 0.0;
  WarpPath path;
  SubTrajectoryRef query;
};

/// Distance of two equal-width rows under `metric`.
double distance(std::span<const float> a, std::span<const float> b, DistanceMetric metric);

/// values(i, j) = metric(query row i, reference row j).
CostMatrix cost_matrix(const MatrixView& query, const MatrixView& reference,
                       DistanceMetric metric);

/// Full DTW: path from (0, 0) to (n-1, m-1). Backtracking prefers the diagonal
/// predecessor, then vertical (i-1, j), then horizontal (i, j-1).
DtwResult dtw(const CostMatrix& c);

/// Subsequence DTW: the query must be consumed entirely, the reference span is free.
/// Row 0 is initialised with C(0, j) and column 0 accumulates down the query.
/// The smallest j wins ties in the last row; predecessor ties break as in dtw().
SubsequenceAlignment sdtw(const CostMatrix& c);

/// Exhaustive path enumeration with the same tie-break order as the dynamic programs.
/// Limited to n, m <= kBruteForceMaxSide.
inline constexpr std::size_t kBruteForceMaxSide = 8;
DtwResult brute_force_dtw(const CostMatrix& c);
SubsequenceAlignment brute_force_sdtw(const CostMatrix& c);

/// Sum of c over the path pairs.
double path_cost(const CostMatrix& c, const WarpPath& path);

/// Continuity and monotonicity of consecutive steps; does not check endpoints.
bool is_continuous_monotone(const WarpPath& path);

}  // namespace strap
