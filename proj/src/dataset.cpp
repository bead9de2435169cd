#include "strap/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "strap/error.hpp"

namespace strap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kEmbeddingsFile = "embeddings.f32";
constexpr const char* kProprioFile = "proprio.f32";
constexpr const char* kActionsFile = "actions.f32";

// Trajectory ids double as directory names.
bool is_valid_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::none_of(id.begin(), id.end(),
                      [](char c) { return c == '/' || c == '\\' || c == '\0'; });
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

std::vector<char> read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Matrix read_matrix(const fs::path& file, const std::string& trajectory_id, std::size_t rows,
                   std::size_t cols) {
  if (!fs::exists(file)) {
    throw Error(ErrorCode::SchemaViolation, "missing binary file " + file.string());
  }
  const std::vector<char> bytes = read_file(file);
  if (bytes.size() % sizeof(float) != 0) {
    throw Error(ErrorCode::CorruptBinary,
                file.string() + " at byte offset " +
                    std::to_string(bytes.size() - bytes.size() % sizeof(float)) +
                    ": truncated float32");
  }
  const std::size_t expected = rows * cols;
  const std::size_t found = bytes.size() / sizeof(float);
  if (found != expected) {
    throw Error(ErrorCode::ShapeMismatch, trajectory_id + ": " + file.filename().string() +
                                              " expected " + std::to_string(expected) +
                                              " floats, found " + std::to_string(found));
  }
  std::vector<float> values(expected);
  for (std::size_t k = 0; k < expected; ++k) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + k * sizeof(float), sizeof(raw));
    values[k] = std::bit_cast<float>(to_little_endian(raw));
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::CorruptBinary, file.string() + " at byte offset " +
                                                std::to_string(k * sizeof(float)) +
                                                ": non-finite value");
    }
  }
  return Matrix(rows, cols, std::move(values));
}

void write_matrix(const fs::path& file, const Matrix& m) {
  std::vector<char> bytes(m.size() * sizeof(float));
  for (std::size_t k = 0; k < m.size(); ++k) {
    const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(m.data()[k]));
    std::memcpy(bytes.data() + k * sizeof(float), &raw, sizeof(raw));
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + file.string());
}

template <typename T>
T require_field(const json& obj, const char* field) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw Error(ErrorCode::SchemaViolation, std::string("missing field \"") + field + "\"");
  }
  const json& v = obj.at(field);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw Error(ErrorCode::SchemaViolation, std::string(field));
    return v.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(ErrorCode::SchemaViolation, std::string(field));
    }
    return static_cast<T>(v.get<std::int64_t>());
  } else {
    if (!v.is_number()) throw Error(ErrorCode::SchemaViolation, std::string(field));
    return v.get<T>();
  }
}

bool first_non_finite(const Matrix& m) {
  return std::any_of(m.values().begin(), m.values().end(),
                     [](float v) { return !std::isfinite(v); });
}

}  // namespace

std::string_view role_name(DatasetRole role) {
  switch (role) {
    case DatasetRole::target: return "target";
    case DatasetRole::prior: return "prior";
    case DatasetRole::retrieval: return "retrieval";
  }
  return "prior";
}

std::optional<DatasetRole> parse_role(std::string_view name) {
  if (name == "target") return DatasetRole::target;
  if (name == "prior") return DatasetRole::prior;
  if (name == "retrieval") return DatasetRole::retrieval;
  return std::nullopt;
}

const Trajectory* Dataset::find(std::string_view id) const noexcept {
  for (const auto& t : trajectories) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

std::size_t Dataset::total_timesteps() const noexcept {
  std::size_t total = 0;
  for (const auto& t : trajectories) total += t.length();
  return total;
}

bool ValidationReport::has(std::string_view code) const noexcept {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  auto add = [&](const std::string& id, std::string_view code, std::string message) {
    report.issues.push_back({id, std::string(code), std::move(message)});
  };

  if (d.embedding_dim < 1) add("", issue::kZeroDim, "embedding_dim must be at least 1");

  std::set<std::string> seen;
  for (const Trajectory& t : d.trajectories) {
    if (!seen.insert(t.id).second) add(t.id, issue::kDuplicateId, "trajectory id is not unique");
    if (!is_valid_id(t.id)) add(t.id, issue::kBadId, "id must be a non-empty path component");

    const std::size_t h = t.embeddings.rows();
    // Retrieved slices only need one row; everything that gets segmented needs two.
    const std::size_t min_rows = d.role == DatasetRole::retrieval ? 1 : 2;
    if (h < min_rows) {
      add(t.id, issue::kTooShort,
          "trajectory has " + std::to_string(h) + " timesteps, need " + std::to_string(min_rows));
    }
    if (t.proprio.rows() != h || t.actions.rows() != h) {
      add(t.id, issue::kRowMismatch,
          "embeddings/proprio/actions rows: " + std::to_string(h) + "/" +
              std::to_string(t.proprio.rows()) + "/" + std::to_string(t.actions.rows()));
    }
    if (d.embedding_dim >= 1 && t.embeddings.cols() != d.embedding_dim) {
      add(t.id, issue::kDimMismatch,
          "embedding width " + std::to_string(t.embeddings.cols()) + " != dataset dim " +
              std::to_string(d.embedding_dim));
    }
    if (first_non_finite(t.embeddings) || first_non_finite(t.proprio) ||
        first_non_finite(t.actions)) {
      add(t.id, issue::kNonFinite, "matrix contains NaN or infinity");
    }
    if (!(std::isfinite(t.frequency_hz) && t.frequency_hz > 0.0)) {
      add(t.id, issue::kBadFrequency, "frequency_hz must be positive");
    }
  }
  return report;
}

Dataset load_dataset(const fs::path& path) {
  const fs::path manifest_path = path / kManifest;
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::MissingManifest, manifest_path.string());
  }
  json manifest;
  {
    const std::vector<char> text = read_file(manifest_path);
    try {
      manifest = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::SchemaViolation, std::string("manifest is not JSON: ") + e.what());
    }
  }

  Dataset d;
  d.name = require_field<std::string>(manifest, "name");
  d.embedding_dim = require_field<std::size_t>(manifest, "embedding_dim");
  if (d.embedding_dim < 1) throw Error(ErrorCode::SchemaViolation, "embedding_dim");
  const auto role = parse_role(require_field<std::string>(manifest, "role"));
  if (!role) throw Error(ErrorCode::SchemaViolation, "role");
  d.role = *role;

  if (!manifest.contains("trajectories") || !manifest["trajectories"].is_array()) {
    throw Error(ErrorCode::SchemaViolation, "trajectories");
  }
  std::set<std::string> seen;
  for (const json& entry : manifest["trajectories"]) {
    Trajectory t;
    t.id = require_field<std::string>(entry, "id");
    if (!is_valid_id(t.id) || !seen.insert(t.id).second) {
      throw Error(ErrorCode::SchemaViolation, "id");
    }
    const auto length = require_field<std::size_t>(entry, "length");
    if (length < 1) throw Error(ErrorCode::SchemaViolation, "length");
    const auto proprio_dim = require_field<std::size_t>(entry, "proprio_dim");
    const auto action_dim = require_field<std::size_t>(entry, "action_dim");
    t.language = require_field<std::string>(entry, "language");
    t.frequency_hz = require_field<double>(entry, "frequency_hz");

    const fs::path dir = path / t.id;
    t.embeddings = read_matrix(dir / kEmbeddingsFile, t.id, length, d.embedding_dim);
    t.proprio = read_matrix(dir / kProprioFile, t.id, length, proprio_dim);
    t.actions = read_matrix(dir / kActionsFile, t.id, length, action_dim);
    d.trajectories.push_back(std::move(t));
  }
  return d;
}

void write_dataset(const Dataset& d, const fs::path& path) {
  const ValidationReport report = validate_dataset(d);
  if (!report.ok()) {
    const ValidationIssue& first = report.issues.front();
    throw Error(ErrorCode::ValidationFailed,
                first.code + " (" + first.trajectory_id + "): " + first.message);
  }

  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, path.string() + ": " + ec.message());

  json entries = json::array();
  for (const Trajectory& t : d.trajectories) {
    const fs::path dir = path / t.id;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, dir.string() + ": " + ec.message());
    write_matrix(dir / kEmbeddingsFile, t.embeddings);
    write_matrix(dir / kProprioFile, t.proprio);
    write_matrix(dir / kActionsFile, t.actions);
    entries.push_back({{"id", t.id},
                       {"length", t.length()},
                       {"proprio_dim", t.proprio.cols()},
                       {"action_dim", t.actions.cols()},
                       {"language", t.language},
                       {"frequency_hz", t.frequency_hz}});
  }
  const json manifest = {{"name", d.name},
                         {"embedding_dim", d.embedding_dim},
                         {"role", role_name(d.role)},
                         {"trajectories", std::move(entries)}};

  std::ofstream out(path / kManifest, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, (path / kManifest).string());
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, (path / kManifest).string());
}

Matrix average_views(std::span<const Matrix> views) {
  if (views.empty()) throw Error(ErrorCode::EmptyInput, "no views to average");
  const std::size_t rows = views.front().rows();
  const std::size_t cols = views.front().cols();
  for (const Matrix& v : views) {
    if (v.rows() != rows || v.cols() != cols) {
      throw Error(ErrorCode::ShapeMismatch, "views must share shape " + std::to_string(rows) +
                                                "x" + std::to_string(cols));
    }
  }
  // Double accumulation of float inputs; exact for any order unless exponents differ widely.
  std::vector<double> acc(rows * cols, 0.0);
  for (const Matrix& v : views) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v.data()[k];
  }
  Matrix out(rows, cols);
  const double n = static_cast<double>(views.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out.data()[k] = static_cast<float>(acc[k] / n);
  return out;
}

bool bit_equal(const Trajectory& a, const Trajectory& b) {
  return a.id == b.id && a.language == b.language &&
         std::bit_cast<std::uint64_t>(a.frequency_hz) ==
             std::bit_cast<std::uint64_t>(b.frequency_hz) &&
         a.embeddings.bit_equal(b.embeddings) && a.proprio.bit_equal(b.proprio) &&
         a.actions.bit_equal(b.actions);
}

bool bit_equal(const Dataset& a, const Dataset& b) {
  if (a.name != b.name || a.embedding_dim != b.embedding_dim || a.role != b.role ||
      a.trajectories.size() != b.trajectories.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    if (!bit_equal(a.trajectories[i], b.trajectories[i])) return false;
  }
  return true;
}

}  // namespace strap
