#include "strap/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "strap/bench.hpp"
#include "strap/error.hpp"
#include "strap/parallel.hpp"
#include "strap/retrieval.hpp"
#include "strap/segmentation.hpp"
#include "strap/synth.hpp"

namespace strap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Expands `--config FILE` into explicit flags inserted right after the subcommand name,
// so that flags given on the command line (which come later) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (config_path.empty()) return out;

  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot read config file " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file is not JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      injected.push_back(flag);
      injected.push_back(joined);
    } else {
      injected.push_back(flag);
      injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  const std::size_t insert_at = std::min<std::size_t>(2, out.size());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(), injected.end());
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      sizes.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("invalid size list entry '" + item + "'");
    }
  }
  return sizes;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + out_path);
  file << text;
  if (!file) throw Error(ErrorCode::IoFailure, "short write to " + out_path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, path + ": " + e.what());
  }
}

std::size_t resolve_threads(std::size_t flag_value) {
  if (const char* env = std::getenv("STRAP_THREADS"); env != nullptr && *env != '\0') {
    return default_thread_count();
  }
  return flag_value == 0 ? default_thread_count() : flag_value;
}

// "auto" selects the calibration recipe.
double resolve_epsilon(const std::string& text, const Dataset& targets) {
  if (text == "auto") return calibrate_epsilon(targets);
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !(v >= 0.0)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--epsilon must be a non-negative number or 'auto'");
  }
}

DistanceMetric resolve_metric(const std::string& text) {
  const auto m = parse_metric(text);
  if (!m) throw UsageError("--metric must be l2 or one_minus_cosine");
  return *m;
}

void require_valid(const Dataset& d, const std::string& label) {
  const ValidationReport report = validate_dataset(d);
  if (!report.ok()) {
    const ValidationIssue& first = report.issues.front();
    throw Error(ErrorCode::ValidationFailed,
                label + ": " + first.code + " (" + first.trajectory_id + ") " + first.message);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sub-trajectory retrieval with subsequence dynamic time warping", "strap"};
  app.option_defaults()->take_last();
  app.require_subcommand(1);

  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::string out_path;

  // validate
  std::string data_dir;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory against its invariants");
  validate->add_option("--data", data_dir, "Dataset directory")->required();
  validate->add_option("--out", out_path, "Write the report JSON here instead of stdout");

  // segment
  std::string epsilon_text;
  std::size_t min_len = 20;
  auto* segment = app.add_subcommand("segment", "Cut trajectories at low-speed transition states");
  segment->add_option("--data", data_dir, "Dataset directory")->required();
  segment->add_option("--epsilon", epsilon_text, "Speed threshold in m/step, or 'auto'")->required();
  segment->add_option("--min-len", min_len, "Minimum chunk length");
  segment->add_option("--out", out_path, "Output JSON");

  // retrieve
  std::string target_dir, prior_dir, metric_text = "l2", method = "strap";
  std::size_t k = 100, pad_h = 10;
  bool dedupe = false;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Match target chunks against a prior dataset");
  retrieve_cmd->add_option("--target", target_dir, "Target dataset directory")->required();
  retrieve_cmd->add_option("--prior", prior_dir, "Prior dataset directory")->required();
  retrieve_cmd->add_option("--k", k, "Number of matches to retrieve");
  retrieve_cmd->add_option("--metric", metric_text, "l2 or one_minus_cosine");
  retrieve_cmd->add_option("--epsilon", epsilon_text, "Speed threshold in m/step, or 'auto'");
  retrieve_cmd->add_option("--min-len", min_len, "Minimum chunk length");
  retrieve_cmd->add_flag("--dedupe", dedupe, "Collapse identical (trajectory, start, end) matches");
  retrieve_cmd->add_option("--method", method, "strap, full_trajectory or single_state")
      ->check(CLI::IsMember({"strap", "full_trajectory", "single_state"}));
  retrieve_cmd->add_option("--pad-h", pad_h, "Temporal padding for single_state");
  retrieve_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
  retrieve_cmd->add_option("--seed", seed, "Unused by retrieval; accepted for uniformity");
  retrieve_cmd->add_option("--out", out_path, "Output JSON (default: stdout)");

  // export
  std::string result_path;
  auto* export_cmd = app.add_subcommand("export", "Write the retrieved slices plus targets as a dataset");
  export_cmd->add_option("--result", result_path, "Retrieval result JSON")->required();
  export_cmd->add_option("--target", target_dir, "Target dataset directory")->required();
  export_cmd->add_option("--prior", prior_dir, "Prior dataset directory")->required();
  export_cmd->add_option("--out", out_path, "Output dataset directory")->required();

  // report
  std::string gt_path, csv_path;
  auto* report_cmd = app.add_subcommand("report", "Task and match-position distribution of a result");
  report_cmd->add_option("--result", result_path, "Retrieval result JSON")->required();
  report_cmd->add_option("--prior", prior_dir, "Prior dataset directory")->required();
  report_cmd->add_option("--ground-truth", gt_path, "Ground-truth JSON from `strap synth`");
  report_cmd->add_option("--csv", csv_path, "Also write one CSV row per match");
  report_cmd->add_option("--out", out_path, "Output JSON");

  // synth
  SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Generate a planted-skill corpus with ground truth");
  synth->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth->add_option("--n-skills", synth_cfg.n_skills);
  synth->add_option("--skill-len-min", synth_cfg.skill_len_min);
  synth->add_option("--skill-len-max", synth_cfg.skill_len_max);
  synth->add_option("--tasks", synth_cfg.tasks);
  synth->add_option("--skills-per-task", synth_cfg.skills_per_task);
  synth->add_option("--trajectories-per-task", synth_cfg.trajectories_per_task);
  synth->add_option("--embedding-dim", synth_cfg.embedding_dim);
  synth->add_option("--warp-jitter", synth_cfg.warp_jitter);
  synth->add_option("--noise-sigma", synth_cfg.noise_sigma);
  synth->add_option("--anchors-per-skill", synth_cfg.anchors_per_skill);
  synth->add_option("--anchor-pool", synth_cfg.anchor_pool);
  synth->add_option("--shared-tasks", synth_cfg.shared_tasks);
  synth->add_flag("--isolate-unshared", synth_cfg.isolate_unshared);
  synth->add_option("--cruise-speed", synth_cfg.cruise_speed_m, "End-effector speed, m/timestep");
  synth->add_option("--ramp-steps", synth_cfg.ramp_steps);
  synth->add_option("--out", out_path, "Output directory (prior/, target/, ground_truth.json)")->required();

  // bench
  BenchConfig bench_cfg;
  std::string sizes_text = "100,200,400,800";
  auto* bench = app.add_subcommand("bench", "Time retrieval against growing prior sizes");
  bench->add_option("--sizes", sizes_text, "Comma-separated prior sizes");
  bench->add_option("--traj-len", bench_cfg.traj_len);
  bench->add_option("--chunks", bench_cfg.chunks);
  bench->add_option("--chunk-len", bench_cfg.chunk_len);
  bench->add_option("--embedding-dim", bench_cfg.embedding_dim);
  bench->add_option("--trials", bench_cfg.trials);
  bench->add_option("--k", bench_cfg.k);
  bench->add_option("--seed", bench_cfg.seed);
  bench->add_option("--threads", threads, "Worker threads (0: all cores)");
  bench->add_option("--csv", csv_path, "Also write rows as CSV");
  bench->add_option("--out", out_path, "Output JSON");

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) {
      const ValidationReport report = validate_dataset(load_dataset(data_dir));
      json issues = json::array();
      for (const auto& i : report.issues) {
        issues.push_back({{"trajectory_id", i.trajectory_id}, {"code", i.code}, {"message", i.message}});
        err << i.code << " " << i.trajectory_id << ": " << i.message << '\n';
      }
      emit(json{{"ok", report.ok()}, {"issues", issues}}.dump(2) + "\n", out_path, out);
      return report.ok() ? kExitOk : kExitFailure;
    }

    if (segment->parsed()) {
      const Dataset d = load_dataset(data_dir);
      require_valid(d, data_dir);
      SegmentationConfig cfg{resolve_epsilon(epsilon_text, d), min_len};
      json all = json::array();
      for (const Trajectory& t : d.trajectories) {
        const Segmentation seg = segment_trajectory(t, cfg);
        json chunks = json::array();
        for (const auto& c : seg.chunks) chunks.push_back({c.start, c.end});
        all.push_back({{"trajectory_id", seg.trajectory_id}, {"chunks", std::move(chunks)}});
      }
      emit(json{{"epsilon", cfg.epsilon}, {"min_len", cfg.min_len}, {"segmentations", all}}.dump(2) + "\n",
           out_path, out);
      return kExitOk;
    }

    if (retrieve_cmd->parsed()) {
      const Dataset targets = load_dataset(target_dir);
      const Dataset prior = load_dataset(prior_dir);
      require_valid(targets, target_dir);
      require_valid(prior, prior_dir);
      if (targets.embedding_dim != prior.embedding_dim) {
        throw Error(ErrorCode::DimMismatch, "target embedding_dim " + std::to_string(targets.embedding_dim) +
                                                " vs prior " + std::to_string(prior.embedding_dim));
      }
      if (k < 1) throw UsageError("--k must be at least 1");
      const std::size_t workers = resolve_threads(threads);
      const DistanceMetric metric = resolve_metric(metric_text);

      RetrievalResult result;
      if (method == "single_state") {
        result = baseline_state_retrieval(targets, prior, k, pad_h, workers);
      } else if (method == "full_trajectory") {
        result = baseline_full_trajectory(targets, prior, k, metric, workers);
      } else {
        if (epsilon_text.empty()) throw UsageError("--epsilon is required for --method strap");
        RetrievalConfig cfg;
        cfg.k = k;
        cfg.metric = metric;
        cfg.segmentation = {resolve_epsilon(epsilon_text, targets), min_len};
        cfg.dedupe = dedupe;
        cfg.threads = workers;
        result = retrieve(targets, prior, cfg);
      }
      emit(to_json(result).dump(2) + "\n", out_path, out);
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      const RetrievalResult result = retrieval_result_from_json(read_json(result_path));
      const Dataset targets = load_dataset(target_dir);
      const Dataset prior = load_dataset(prior_dir);
      const Dataset exported = export_retrieval(result, targets, prior, out_path);
      out << "wrote " << exported.trajectories.size() << " trajectories to " << out_path << '\n';
      return kExitOk;
    }

    if (report_cmd->parsed()) {
      const RetrievalResult result = retrieval_result_from_json(read_json(result_path));
      const Dataset prior = load_dataset(prior_dir);
      std::optional<GroundTruth> gt;
      if (!gt_path.empty()) gt = load_ground_truth(gt_path);
      json j = to_json(retrieval_report(result, prior, gt ? &*gt : nullptr));
      if (gt) j["evaluation"] = to_json(evaluate(result, *gt));
      emit(j.dump(2) + "\n", out_path, out);
      if (!csv_path.empty()) emit(report_csv(result, prior), csv_path, out);
      return kExitOk;
    }

    if (synth->parsed()) {
      const SynthData data = generate_synthetic(synth_cfg);
      const fs::path root(out_path);
      write_dataset(data.prior, root / "prior");
      write_dataset(data.target, root / "target");
      save_ground_truth(data.truth, root / "ground_truth.json");
      out << "wrote " << data.prior.trajectories.size() << " prior and "
          << data.target.trajectories.size() << " target trajectories to " << out_path << '\n';
      return kExitOk;
    }

    if (bench->parsed()) {
      bench_cfg.sizes = parse_sizes(sizes_text);
      bench_cfg.threads = resolve_threads(threads);
      const BenchReport report = run_benchmark(bench_cfg);
      emit(to_json(report).dump(2) + "\n", out_path, out);
      if (!csv_path.empty()) emit(bench_csv(report), csv_path, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace strap
