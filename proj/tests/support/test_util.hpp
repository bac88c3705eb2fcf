// Shared helpers for the unit suites.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bevplan/rng.hpp"
#include "bevplan/scene/types.hpp"

namespace testutil {

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("bevplan_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path_.string() : (path_ / child).string();
  }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline bevplan::scene::Trajectory straight_trajectory(int steps, double dt, double speed,
                                                      double lateral = 0.0) {
  bevplan::scene::Trajectory t;
  t.dt = dt;
  for (int k = 1; k <= steps; ++k) {
    t.poses.push_back({speed * dt * k, lateral, 0.0});
  }
  return t;
}

}  // namespace testutil
