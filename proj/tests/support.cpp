#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <unistd.h>
#include <vector>

namespace wmbench::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Frame solid_frame(int w, int h, std::uint8_t value) {
  Frame f(w, h);
  std::fill(f.pixels.begin(), f.pixels.end(), value);
  return f;
}

World empty_world(std::uint64_t seed) {
  World w = build_world({seed, SceneCategory::Landscape, 24000.0});
  std::fill(w.terrain.heights.begin(), w.terrain.heights.end(), 0.0);
  w.terrain.min_height = 0.0;
  w.terrain.max_height = 0.0;
  w.landmarks.clear();
  return w;
}

Landmark make_box(double x0, double y0, double x1, double y1, double height, int color_id) {
  Landmark lm;
  lm.box = {{x0, y0, -10.0}, {x1, y1, height}};
  lm.color_id = color_id;
  lm.color = {static_cast<std::uint8_t>(60 + 10 * color_id), 150, 90};
  return lm;
}

std::string tree_digest(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& rel : files) {
    const auto bytes = read_file_bytes(root / rel);
    out += rel.generic_string();
    out += '\0';
    out += std::to_string(bytes.size());
    out += '\0';
    out.append(bytes.begin(), bytes.end());
  }
  return out;
}

}  // namespace wmbench::testing
