#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wmbench/frame.hpp"
#include "wmbench/world_sim.hpp"

namespace wmbench::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "wmbench-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Frame solid_frame(int w, int h, std::uint8_t value);

/// A world with no terrain relief and no landmarks; tests add their own boxes.
World empty_world(std::uint64_t seed = 1);

Landmark make_box(double x0, double y0, double x1, double y1, double height, int color_id = 0);

/// Every regular file under `root`, relative path -> bytes, for tree comparison.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace wmbench::testing
