#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "strap/error.hpp"
#include "strap/retrieval.hpp"

namespace strap {

using nlohmann::json;

namespace {

Histogram make_histogram(const std::vector<std::size_t>& values, std::size_t bins) {
  Histogram h;
  const std::size_t max_value =
      values.empty() ? 0 : *std::max_element(values.begin(), values.end());
  const std::size_t width = std::max<std::size_t>(1, (max_value + bins) / bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(b * width));
  h.counts.assign(bins, 0);
  for (std::size_t v : values) ++h.counts[std::min(bins - 1, v / width)];
  return h;
}

json histogram_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

TaskDistributionReport retrieval_report(const RetrievalResult& result, const Dataset& prior,
                                        const GroundTruth* ground_truth) {
  TaskDistributionReport report;
  report.match_count = result.selected.size();

  std::map<std::string, std::size_t> per_language;
  for (const Candidate& c : result.selected) {
    const Match& m = c.match;
    const std::size_t len = m.end - m.start;
    per_language[c.language] += len;
    report.total_timesteps += len;
    report.starts.push_back(m.start);
    report.ends.push_back(m.end);
    report.lengths.push_back(len);
    if (const Trajectory* t = prior.find(m.trajectory_id); t != nullptr && t->length() > 0) {
      report.start_fractions.push_back(static_cast<double>(m.start) / static_cast<double>(t->length()));
      report.end_fractions.push_back(static_cast<double>(m.end) / static_cast<double>(t->length()));
    }
  }

  const double total = static_cast<double>(report.total_timesteps);
  auto share = [&](std::size_t n) { return total > 0 ? static_cast<double>(n) / total : 0.0; };

  std::vector<LanguageShare> ranked;
  for (const auto& [lang, n] : per_language) ranked.push_back({lang, n, share(n)});
  std::stable_sort(ranked.begin(), ranked.end(), [](const LanguageShare& a, const LanguageShare& b) {
    return a.timesteps > b.timesteps;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i < kReportTopTasks) {
      report.top_tasks.push_back(ranked[i]);
    } else {
      report.others.timesteps += ranked[i].timesteps;
    }
  }
  report.others.share = share(report.others.timesteps);

  report.start_histogram = make_histogram(report.starts, kReportHistogramBins);
  report.end_histogram = make_histogram(report.ends, kReportHistogramBins);
  report.length_histogram = make_histogram(report.lengths, kReportHistogramBins);

  if (ground_truth != nullptr) {
    std::map<SkillId, std::size_t> per_skill;
    const auto relevant = ground_truth->tasks_sharing_target_skills();
    const std::set<TaskId> relevant_set(relevant.begin(), relevant.end());
    std::size_t relevant_steps = 0;
    for (const Candidate& c : result.selected) {
      const Match& m = c.match;
      const auto labels = ground_truth->labels.find(m.trajectory_id);
      if (labels == ground_truth->labels.end() || labels->second.size() < m.end) {
        throw Error(ErrorCode::UnknownId, "no ground-truth labels for " + m.trajectory_id);
      }
      for (std::size_t t = m.start; t < m.end; ++t) ++per_skill[labels->second[t]];
      const auto task = ground_truth->trajectory_task.find(m.trajectory_id);
      if (task != ground_truth->trajectory_task.end() && relevant_set.contains(task->second)) {
        relevant_steps += m.end - m.start;
      }
    }
    std::map<SkillId, double> shares;
    for (const auto& [skill, n] : per_skill) shares[skill] = share(n);
    report.skill_shares = std::move(shares);
    if (ground_truth->target_task) report.relevant_task_share = share(relevant_steps);
  }
  return report;
}

json to_json(const TaskDistributionReport& report) {
  json tasks = json::array();
  for (const LanguageShare& s : report.top_tasks) {
    tasks.push_back({{"language", s.language}, {"timesteps", s.timesteps}, {"share", s.share}});
  }
  json j = {{"match_count", report.match_count},
            {"total_timesteps", report.total_timesteps},
            {"top_tasks", std::move(tasks)},
            {"others", {{"timesteps", report.others.timesteps}, {"share", report.others.share}}},
            {"starts", report.starts},
            {"ends", report.ends},
            {"lengths", report.lengths},
            {"start_fractions", report.start_fractions},
            {"end_fractions", report.end_fractions},
            {"histograms",
             {{"start", histogram_json(report.start_histogram)},
              {"end", histogram_json(report.end_histogram)},
              {"length", histogram_json(report.length_histogram)}}}};
  if (report.skill_shares) {
    json skills = json::object();
    for (const auto& [skill, s] : *report.skill_shares) skills[std::to_string(skill)] = s;
    j["skill_shares"] = std::move(skills);
  }
  if (report.relevant_task_share) j["relevant_task_share"] = *report.relevant_task_share;
  return j;
}

std::string report_csv(const RetrievalResult& result, const Dataset& prior) {
  std::ostringstream out;
  out.precision(17);
  out << "index,prior_traj,start,end,length,start_fraction,cost,language,query_traj,query_start,"
         "query_end\n";
  for (std::size_t i = 0; i < result.selected.size(); ++i) {
    const Match& m = result.selected[i].match;
    const Trajectory* t = prior.find(m.trajectory_id);
    const double frac =
        t != nullptr && t->length() > 0 ? static_cast<double>(m.start) / static_cast<double>(t->length()) : 0.0;
    out << i << ',' << csv_field(m.trajectory_id) << ',' << m.start << ',' << m.end << ','
        << (m.end - m.start) << ',' << frac << ',' << m.cost << ','
        << csv_field(result.selected[i].language) << ',' << csv_field(m.query.trajectory_id) << ','
        << m.query.start << ',' << m.query.end << '\n';
  }
  return out.str();
}

}  // namespace strap
