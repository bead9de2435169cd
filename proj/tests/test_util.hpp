#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "strap/dataset.hpp"

namespace strap::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("strap-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

inline Trajectory random_trajectory(std::mt19937_64& rng, const std::string& id, std::size_t h,
                                    std::size_t e, std::size_t p = 3, std::size_t a = 2) {
  Trajectory t;
  t.id = id;
  t.embeddings = random_matrix(rng, h, e);
  t.proprio = random_matrix(rng, h, p);
  t.actions = random_matrix(rng, h, a);
  t.language = "language of " + id;
  t.frequency_hz = 15.0;
  return t;
}

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t count, std::size_t e,
                              DatasetRole role = DatasetRole::prior) {
  Dataset d;
  d.name = "random";
  d.embedding_dim = e;
  d.role = role;
  std::uniform_int_distribution<std::size_t> len(2, 40);
  for (std::size_t i = 0; i < count; ++i) {
    d.trajectories.push_back(random_trajectory(rng, "traj" + std::to_string(i), len(rng), e));
  }
  return d;
}

/// Trajectory whose x coordinate follows `xs` (y = z = 0), embeddings from `rng`.
inline Trajectory trajectory_from_x(const std::string& id, const std::vector<float>& xs,
                                    std::size_t e = 4) {
  std::mt19937_64 rng(xs.size());
  Trajectory t = random_trajectory(rng, id, xs.size(), e);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    t.proprio(r, 0) = xs[r];
    t.proprio(r, 1) = 0.0f;
    t.proprio(r, 2) = 0.0f;
  }
  return t;
}

}  // namespace strap::testing
