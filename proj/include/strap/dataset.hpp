#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strap/matrix.hpp"

namespace strap {

enum class DatasetRole { target, prior, retrieval };

std::string_view role_name(DatasetRole role);
std::optional<DatasetRole> parse_role(std::string_view name);

/// One demonstration. Row t of every matrix describes timestep t.
///
/// The first three proprio columns hold end-effector XYZ position in meters.
/// Actions are carried through untouched; nothing in the engine reads them.
struct Trajectory {
  std::string id;
  Matrix embeddings;  // H x E
  Matrix proprio;     // H x P
  Matrix actions;     // H x A
  std::string language;
  double frequency_hz = 15.0;

  std::size_t length() const noexcept { return embeddings.rows(); }
};

struct Dataset {
  std::string name;
  std::size_t embedding_dim = 0;
  DatasetRole role = DatasetRole::prior;
  std::vector<Trajectory> trajectories;

  /// Linear lookup; datasets are small enough that an index is not worth keeping.
  const Trajectory* find(std::string_view id) const noexcept;
  std::size_t total_timesteps() const noexcept;
};

/// Half-open timestep range [start, end) of a named trajectory.
struct SubTrajectoryRef {
  std::string trajectory_id;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const SubTrajectoryRef&, const SubTrajectoryRef&) = default;
};

struct ValidationIssue {
  std::string trajectory_id;  // empty for dataset-level issues
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has(std::string_view code) const noexcept;
};

/// Issue codes emitted by validate_dataset.
namespace issue {
inline constexpr std::string_view kDuplicateId = "DUPLICATE_ID";
inline constexpr std::string_view kBadId = "BAD_ID";
inline constexpr std::string_view kTooShort = "TOO_SHORT";
inline constexpr std::string_view kRowMismatch = "ROW_MISMATCH";
inline constexpr std::string_view kDimMismatch = "DIM_MISMATCH";
inline constexpr std::string_view kZeroDim = "ZERO_DIM";
inline constexpr std::string_view kNonFinite = "NON_FINITE";
inline constexpr std::string_view kBadFrequency = "BAD_FREQUENCY";
}  // namespace issue

ValidationReport validate_dataset(const Dataset& d);

/// Reads `<path>/manifest.json` and the per-trajectory float32 files.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes a dataset directory. Refuses datasets that fail validation.
/// Existing trajectory subdirectories under `path` are overwritten, others are left alone.
void write_dataset(const Dataset& d, const std::filesystem::path& path);

/// Element-wise mean of equally shaped per-view embedding matrices.
Matrix average_views(std::span<const Matrix> views);

/// Field-by-field equality with byte-exact matrix comparison.
bool bit_equal(const Trajectory& a, const Trajectory& b);
bool bit_equal(const Dataset& a, const Dataset& b);

}  // namespace strap
