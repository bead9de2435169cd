#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strap/dataset.hpp"
#include "strap/dtw.hpp"
#include "strap/ground_truth.hpp"
#include "strap/segmentation.hpp"

namespace strap {

struct RetrievalConfig {
  std::size_t k = 100;
  DistanceMetric metric = DistanceMetric::l2;
  SegmentationConfig segmentation;
  bool dedupe = false;
  /// Temporal padding of single-state retrieval; 0 for sub-trajectory methods.
  std::size_t pad_h = 0;
  /// Worker count for match_all; 0 means default_thread_count(). Not echoed in results.
  std::size_t threads = 0;
};

/// A match together with the language instruction of the prior trajectory it came from.
struct Candidate {
  Match match;
  std::string language;
};

struct QueryCandidates {
  SubTrajectoryRef query;
  std::vector<Candidate> candidates;  // ascending cost, then trajectory id, then start
};

/// One entry per query chunk, in target manifest order then chunk start.
struct MatchTable {
  std::vector<QueryCandidates> queries;
  std::size_t total_candidates() const noexcept;
};

struct QueryCount {
  SubTrajectoryRef query;
  std::size_t count = 0;
};

struct RetrievalResult {
  std::string method = "strap";
  RetrievalConfig config;
  std::vector<Candidate> selected;
  std::vector<QueryCount> per_query_counts;
  /// Fewer than k matches were available.
  bool exhausted = false;
};

/// Chunks of every target trajectory, in manifest order.
std::vector<SubTrajectoryRef> segment_targets(const Dataset& targets,
                                              const SegmentationConfig& cfg);

/// Best S-DTW match of every query inside every prior trajectory. Query embeddings are
/// row views into `targets`. Output is independent of `threads`.
MatchTable match_queries(std::span<const SubTrajectoryRef> queries, const Dataset& targets,
                         const Dataset& prior, DistanceMetric metric, std::size_t threads = 0);

/// Segments the targets, then match_queries over the chunks.
MatchTable match_all(const Dataset& targets, const Dataset& prior, const RetrievalConfig& cfg);

/// Round-robin allocation across queries: each round every query that still has candidates
/// contributes its next cheapest one. When the last round cannot be served in full, queries
/// whose next candidate is cheapest go first. With `dedupe`, a (trajectory, start, end)
/// triple already taken is skipped.
RetrievalResult select_top_k(const MatchTable& table, std::size_t k, bool dedupe = false);

/// match_all followed by select_top_k, with the config echoed into the result.
RetrievalResult retrieve(const Dataset& targets, const Dataset& prior, const RetrievalConfig& cfg);

/// Id given to an exported slice.
std::string slice_id(const std::string& prior_id, std::size_t start, std::size_t end,
                     std::size_t dup_index);

/// Materialises the selected slices plus whole copies of the targets as a retrieval
/// dataset, writes it to `out_path` and returns it.
Dataset export_retrieval(const RetrievalResult& result, const Dataset& targets,
                         const Dataset& prior, const std::filesystem::path& out_path);

/// Builds the retrieval dataset without writing it.
Dataset build_retrieval_dataset(const RetrievalResult& result, const Dataset& targets,
                                const Dataset& prior);

nlohmann::json to_json(const RetrievalResult& result);
RetrievalResult retrieval_result_from_json(const nlohmann::json& j);

/// Histogram with equal-width integer bins starting at 0.
struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

struct LanguageShare {
  std::string language;
  std::size_t timesteps = 0;
  double share = 0.0;
};

struct TaskDistributionReport {
  std::size_t match_count = 0;
  std::size_t total_timesteps = 0;
  std::vector<LanguageShare> top_tasks;  // at most five, descending share
  LanguageShare others{"others", 0, 0.0};
  std::vector<std::size_t> starts, ends, lengths;
  std::vector<double> start_fractions, end_fractions;  // relative to the prior trajectory length
  Histogram start_histogram, end_histogram, length_histogram;
  /// Present when ground truth was supplied.
  std::optional<std::map<SkillId, double>> skill_shares;
  std::optional<double> relevant_task_share;
};

inline constexpr std::size_t kReportTopTasks = 5;
inline constexpr std::size_t kReportHistogramBins = 10;

TaskDistributionReport retrieval_report(const RetrievalResult& result, const Dataset& prior,
                                        const GroundTruth* ground_truth = nullptr);

nlohmann::json to_json(const TaskDistributionReport& report);
/// One row per selected match.
std::string report_csv(const RetrievalResult& result, const Dataset& prior);

}  // namespace strap
