#include "wmbench/harness/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "wmbench/error.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/trajectory.hpp"

namespace wmbench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kWorldAttempts = 16;

std::string two_digits(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

// Hands out categories round-robin per (perspective, split) cell, carrying
// on across suites so the cell as a whole stays balanced.
class CategoryDealer {
 public:
  explicit CategoryDealer(const std::vector<SceneCategory>& cats) : cats_(cats) {}
  SceneCategory next(Perspective p, const std::string& split) {
    auto& n = counters_[{int(p), split}];
    return cats_[n++ % cats_.size()];
  }

 private:
  const std::vector<SceneCategory>& cats_;
  std::map<std::pair<int, std::string>, std::size_t> counters_;
};

void check_mirror_poses(const std::vector<Pose>& poses, int memory_len, int leg) {
  const auto first = poses.begin() + (memory_len - 1);
  const std::vector<Pose> probe(first, first + 2 * leg + 1);
  if (!mirrors(probe)) throw ConfigError("mirror path does not retrace in this world");
}

}  // namespace

std::vector<const ManifestEntry*> DatasetManifest::select(const std::string& suite_tag) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : episodes) {
    if (e.suite == suite_tag) out.push_back(&e);
  }
  return out;
}

void DatasetConfig::validate() const {
  if (resolution.width <= 0 || resolution.height <= 0) throw ConfigError("resolution must be positive");
  if (memory_len < 1 || predict_len < 1) throw ConfigError("memory and prediction lengths must be >= 1");
  if (loop_segments < 1) throw ConfigError("loop segments must be >= 1");
  if (memory_len + predict_len - 1 > 2 * loop_segments * kSegmentFrames) {
    throw ConfigError("T+k-1 = " + std::to_string(memory_len + predict_len - 1) +
                      " exceeds the revisit loop length " +
                      std::to_string(2 * loop_segments * kSegmentFrames));
  }
  if (!(extent > 0.0)) throw ConfigError("world extent must be positive");
  if (perspectives.empty()) throw ConfigError("no perspectives selected");
  if (categories.empty()) throw ConfigError("no scene categories selected");
  if (shared_test_per_perspective < 0 || shared_train_per_perspective < 0 ||
      generalization_per_preset < 0) {
    throw ConfigError("episode counts must be non-negative");
  }
  if (shared_suite) (void)preset(shared_preset);
  if (generalization_suite) {
    if (generalization_presets.empty()) throw ConfigError("generalization suite has no presets");
    for (const auto& p : generalization_presets) (void)preset(p);
  }
  if (!shared_suite && !generalization_suite && !mirror_suite) throw ConfigError("no suites selected");
}

std::vector<ActionVector> mirror_episode_actions(int path_id, int memory_len) {
  const auto paths = gen_mirror_paths();
  const auto it = std::find_if(paths.begin(), paths.end(),
                               [&](const MirrorPath& p) { return p.path_id == path_id; });
  if (it == paths.end()) throw ConfigError("unknown mirror path " + std::to_string(path_id));
  std::vector<ActionVector> out;
  const int half = (memory_len - 1) / 2;
  out.insert(out.end(), std::size_t(half), ActionVector{ActionPrimitive::YawLeft});
  out.insert(out.end(), std::size_t(half), ActionVector{ActionPrimitive::YawRight});
  out.insert(out.end(), std::size_t(memory_len - 1 - 2 * half), ActionVector{});
  out.insert(out.end(), it->forward_actions.begin(), it->forward_actions.end());
  out.insert(out.end(), it->reverse_actions.begin(), it->reverse_actions.end());
  return out;
}

DatasetManifest gen_dataset(const DatasetConfig& cfg, const fs::path& out_dir, bool overwrite) {
  cfg.validate();

  DatasetManifest m;
  m.seed = cfg.seed;
  m.resolution = cfg.resolution;
  m.memory_len = cfg.memory_len;
  m.predict_len = cfg.predict_len;
  m.shared_preset = cfg.shared_suite ? cfg.shared_preset : "";

  CategoryDealer dealer(cfg.categories);
  auto add = [&](ManifestEntry e) {
    e.path = "episodes/" + e.id;
    m.episodes.push_back(std::move(e));
  };
  for (Perspective p : cfg.perspectives) {
    const std::string pname(name(p));
    if (cfg.shared_suite) {
      for (const std::string split : {"test", "train"}) {
        const int count = split == "test" ? cfg.shared_test_per_perspective
                                          : cfg.shared_train_per_perspective;
        for (int i = 0; i < count; ++i) {
          ManifestEntry e;
          e.category = dealer.next(p, split);
          e.id = "shared-" + split + "-" + pname + "-" + two_digits(i) + "-" +
                 std::string(name(e.category));
          e.perspective = p;
          e.preset = cfg.shared_preset;
          e.suite = suite::kShared;
          e.split = split;
          add(std::move(e));
        }
      }
    }
    if (cfg.generalization_suite) {
      for (const auto& pr : cfg.generalization_presets) {
        for (int i = 0; i < cfg.generalization_per_preset; ++i) {
          ManifestEntry e;
          e.category = dealer.next(p, "test");
          e.id = "gen-" + pname + "-" + pr + "-" + two_digits(i) + "-" + std::string(name(e.category));
          e.perspective = p;
          e.preset = pr;
          e.suite = suite::kGeneralization;
          e.split = "test";
          add(std::move(e));
        }
      }
    }
    if (cfg.mirror_suite &&
        std::find(cfg.mirror_perspectives.begin(), cfg.mirror_perspectives.end(), p) !=
            cfg.mirror_perspectives.end()) {
      const std::string mp = cfg.shared_suite ? cfg.shared_preset : "mid";
      for (const auto& path : gen_mirror_paths()) {
        ManifestEntry e;
        e.category = dealer.next(p, "test");
        e.id = "mirror-" + pname + "-" + two_digits(path.path_id) + "-" + path.label;
        e.perspective = p;
        e.preset = mp;
        e.suite = suite::kMirror;
        e.split = "test";
        e.mirror_path = path.path_id;
        e.mirror_leg = int(path.forward_actions.size());
        add(std::move(e));
      }
    }
  }

  if (fs::exists(out_dir) && !fs::is_directory(out_dir)) {
    throw ConfigError("output path exists and is not a directory: " + out_dir.string());
  }
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!overwrite) throw ConfigError("output directory is not empty: " + out_dir.string());
    fs::remove(out_dir / "manifest.json");
    fs::remove_all(out_dir / "episodes");
  }
  fs::create_directories(out_dir / "episodes");

  parallel_for(
      m.episodes.size(),
      [&](std::size_t idx) {
        ManifestEntry& e = m.episodes[idx];
        const ActionSpaceConfig as = preset(e.preset);
        const std::uint64_t base = derive_seed(cfg.seed, hash_string(e.id));
        std::string last_error;
        for (int attempt = 0; attempt < kWorldAttempts; ++attempt) {
          const WorldSpec spec{derive_seed(base, std::uint64_t(attempt)), e.category, cfg.extent};
          try {
            const World world = build_world(spec);
            const Pose start = start_pose(world);
            Episode ep;
            if (e.suite == suite::kMirror) {
              const auto actions = mirror_episode_actions(e.mirror_path, cfg.memory_len);
              check_mirror_poses(simulate(world, start, actions, as), cfg.memory_len, e.mirror_leg);
              ep = record_episode(world, as, e.perspective, start, actions, cfg.memory_len,
                                  2 * e.mirror_leg, cfg.resolution);
            } else {
              const auto actions = gen_revisit_loop(derive_seed(spec.seed, 1), cfg.loop_segments, as,
                                                    &world, start);
              ep = record_episode(world, as, e.perspective, start, actions, cfg.memory_len,
                                  cfg.predict_len, cfg.resolution);
            }
            write_episode(ep, out_dir / e.path);
            e.world_seed = spec.seed;
            return;
          } catch (const ConfigError& err) {
            last_error = err.what();
          }
        }
        throw ConfigError("episode " + e.id + ": no feasible world after " +
                          std::to_string(kWorldAttempts) + " attempts (" + last_error + ")");
      },
      cfg.jobs);

  if (!categories_balanced(m, cfg.categories)) throw ConfigError("scene categories are not balanced");
  write_manifest(m, out_dir / "manifest.json");
  return m;
}

bool categories_balanced(const DatasetManifest& manifest, std::span<const SceneCategory> categories) {
  std::map<std::pair<int, std::string>, std::map<SceneCategory, int>> cells;
  for (const auto& e : manifest.episodes) cells[{int(e.perspective), e.split}][e.category]++;
  for (const auto& [cell, counts] : cells) {
    int lo = 1 << 30, hi = 0;
    for (SceneCategory c : categories) {
      const auto it = counts.find(c);
      const int n = it == counts.end() ? 0 : it->second;
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    for (const auto& [c, n] : counts) {
      if (std::find(categories.begin(), categories.end(), c) == categories.end()) return false;
    }
    if (hi - lo > 1) return false;
  }
  return true;
}

void write_manifest(const DatasetManifest& m, const fs::path& file) {
  json j;
  j["format_version"] = kManifestFormatVersion;
  j["toolkit_version"] = m.toolkit_version;
  j["seed"] = m.seed;
  j["resolution"] = {{"width", m.resolution.width}, {"height", m.resolution.height}};
  j["memory_len"] = m.memory_len;
  j["predict_len"] = m.predict_len;
  j["shared_preset"] = m.shared_preset;
  json eps = json::array();
  for (const auto& e : m.episodes) {
    json je;
    je["id"] = e.id;
    je["path"] = e.path;
    je["perspective"] = std::string(name(e.perspective));
    je["preset"] = e.preset;
    je["suite"] = e.suite;
    je["split"] = e.split;
    je["category"] = std::string(name(e.category));
    je["world_seed"] = e.world_seed;
    if (e.suite == suite::kMirror) {
      je["mirror_path"] = e.mirror_path;
      je["mirror_leg"] = e.mirror_leg;
    }
    eps.push_back(std::move(je));
  }
  j["episodes"] = std::move(eps);
  std::ofstream out(file, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + file.string());
}

fs::path manifest_root(const fs::path& path) {
  return fs::is_directory(path) ? path : path.parent_path();
}

DatasetManifest read_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "manifest.json" : path;
  if (!fs::exists(file)) throw FormatError("missing dataset manifest " + file.string());
  DatasetManifest m;
  try {
    std::ifstream in(file);
    const json j = json::parse(in);
    const int version = j.at("format_version").get<int>();
    if (version != kManifestFormatVersion) {
      throw FormatError("unsupported manifest format version " + std::to_string(version));
    }
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.resolution = {j.at("resolution").at("width").get<int>(),
                    j.at("resolution").at("height").get<int>()};
    m.memory_len = j.at("memory_len").get<int>();
    m.predict_len = j.at("predict_len").get<int>();
    m.shared_preset = j.at("shared_preset").get<std::string>();
    for (const auto& je : j.at("episodes")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      e.path = je.at("path").get<std::string>();
      e.perspective = perspective_from_name(je.at("perspective").get<std::string>());
      e.preset = je.at("preset").get<std::string>();
      e.suite = je.at("suite").get<std::string>();
      e.split = je.at("split").get<std::string>();
      e.category = category_from_name(je.at("category").get<std::string>());
      e.world_seed = je.at("world_seed").get<std::uint64_t>();
      e.mirror_path = je.value("mirror_path", 0);
      e.mirror_leg = je.value("mirror_leg", 0);
      if (e.suite != suite::kShared && e.suite != suite::kGeneralization && e.suite != suite::kMirror) {
        throw FormatError("episode " + e.id + " has unknown suite '" + e.suite + "'");
      }
      m.episodes.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError("malformed manifest " + file.string() + ": " + ex.what());
  } catch (const ConfigError& ex) {
    throw FormatError("malformed manifest " + file.string() + ": " + ex.what());
  }
  return m;
}

}  // namespace wmbench
