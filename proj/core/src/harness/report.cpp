#include "wmbench/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wmbench/error.hpp"

namespace wmbench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

ojson to_json(const MetricReport& r) {
  ojson j;
  j["model"] = r.model;
  j["context_policy"] = r.context_policy;
  j["perspective"] = r.perspective;
  j["episode_count"] = r.episode_count;
  j["scores"] = ojson::object();
  for (const auto& [k, v] : r.scores) j["scores"][k] = v;
  j["counts"] = ojson::object();
  for (const auto& [k, v] : r.counts) j["counts"][k] = v;
  if (!r.asg_per_preset.empty()) {
    j["asg_per_preset"] = ojson::object();
    for (const auto& [k, v] : r.asg_per_preset) j["asg_per_preset"][k] = v;
  }
  return j;
}

MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.model = j.value("model", "");
  r.context_policy = j.value("context_policy", "");
  r.perspective = j.value("perspective", "");
  r.episode_count = j.at("episode_count").get<std::size_t>();
  for (const auto& [k, v] : j.at("scores").items()) r.scores[k] = v.get<double>();
  if (j.contains("counts")) {
    for (const auto& [k, v] : j.at("counts").items()) r.counts[k] = v.get<std::size_t>();
  }
  if (j.contains("asg_per_preset")) {
    for (const auto& [k, v] : j.at("asg_per_preset").items()) r.asg_per_preset[k] = v.get<double>();
  }
  return r;
}

ojson to_json(const EvaluationReport& r) {
  ojson j;
  j["toolkit_version"] = kToolkitVersion;
  j["model"] = r.model;
  j["mode"] = r.mode;
  j["context_policy"] = r.context_policy;
  j["dataset_seed"] = r.dataset_seed;
  j["reports"] = ojson::array();
  for (const auto& m : r.perspectives) j["reports"].push_back(to_json(m));
  j["episodes"] = ojson::array();
  for (const auto& e : r.episodes) {
    ojson je;
    je["id"] = e.episode;
    je["suite"] = e.suite;
    je["perspective"] = e.perspective;
    je["preset"] = e.preset;
    je["scores"] = ojson::object();
    for (const auto& [k, v] : e.scores) je["scores"][k] = v;
    j["episodes"].push_back(std::move(je));
  }
  j["failures"] = ojson::array();
  for (const auto& f : r.failures) {
    j["failures"].push_back({{"episode", f.episode}, {"stage", f.stage}, {"kind", f.kind}, {"message", f.message}});
  }
  return j;
}

EvaluationReport evaluation_report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  try {
    r.model = j.value("model", "");
    r.mode = j.value("mode", "");
    r.context_policy = j.value("context_policy", "");
    r.dataset_seed = j.value("dataset_seed", std::uint64_t(0));
    for (const auto& m : j.at("reports")) r.perspectives.push_back(metric_report_from_json(m));
    if (j.contains("episodes")) {
      for (const auto& je : j.at("episodes")) {
        EpisodeResult e;
        e.episode = je.at("id").get<std::string>();
        e.suite = je.at("suite").get<std::string>();
        e.perspective = je.value("perspective", "");
        e.preset = je.value("preset", "");
        for (const auto& [k, v] : je.at("scores").items()) e.scores[k] = v.get<double>();
        r.episodes.push_back(std::move(e));
      }
    }
    if (j.contains("failures")) {
      for (const auto& jf : j.at("failures")) {
        r.failures.push_back({jf.at("episode").get<std::string>(), jf.at("stage").get<std::string>(),
                              jf.at("kind").get<std::string>(), jf.at("message").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed report: ") + ex.what());
  }
  return r;
}

std::string format_table(const std::vector<MetricReport>& rows) {
  struct Column {
    const char* title;
    const char* key;
  };
  static const Column columns[] = {
      {"Long Context Mem.", dim::kLcm},    {"Generated Scene Consis.", dim::kGsc},
      {"Action Space Generalization", dim::kAsg}, {"Aesthetic", dim::kAesthetic},
      {"Image Quality", dim::kImaging},   {"RPE Trans", dim::kRpeTrans},
      {"RPE Rot", dim::kRpeRot},
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "Context", "Perspective"});
  for (const auto& c : columns) cells.back().push_back(c.title);
  for (const auto& r : rows) {
    std::vector<std::string> line{r.model, r.context_policy, r.perspective};
    for (const auto& c : columns) {
      const auto v = r.score(c.key);
      if (!v) {
        line.push_back("-");
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", *v);
      line.push_back(buf);
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (std::size_t row = 0; row < cells.size(); ++row) {
    const auto& line = cells[row];
    for (std::size_t i = 0; i < line.size(); ++i) {
      const std::string& s = line[i];
      const std::size_t pad = width[i] - s.size();
      if (i < 3) out += s + std::string(pad, ' ');
      else out += std::string(pad, ' ') + s;
      out += i + 1 < line.size() ? "  " : "\n";
    }
    if (row == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

void write_report(const EvaluationReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::trunc);
    out << to_json(r).dump(2) << '\n';
    if (!out) throw Error("write failed: " + (dir / "report.json").string());
  }
  std::ofstream out(dir / "report.txt", std::ios::trunc);
  out << format_table(r.perspectives);
  if (!r.failures.empty()) {
    out << "\n" << r.failures.size() << " episode failure(s):\n";
    for (const auto& f : r.failures) out << "  " << f.episode << " [" << f.stage << "/" << f.kind << "] " << f.message << '\n';
  }
  if (!out) throw Error("write failed: " + (dir / "report.txt").string());
}

EvaluationReport read_report(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "report.json" : path;
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open report " + file.string());
  try {
    return evaluation_report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError("malformed report " + file.string() + ": " + ex.what());
  }
}

void merge_external_scores(EvaluationReport& r, const nlohmann::json& scores) {
  if (!scores.is_object()) throw FormatError("external scores must be an object keyed by perspective");
  for (auto& m : r.perspectives) {
    if (!scores.contains(m.perspective)) continue;
    for (const char* key : {dim::kAesthetic, dim::kImaging}) {
      const auto& s = scores.at(m.perspective);
      if (!s.contains(key)) continue;
      if (!s.at(key).is_number()) throw FormatError(std::string("external ") + key + " score is not a number");
      const double v = s.at(key).get<double>();
      if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("invalid external ") + key + " score");
      m.scores[key] = v;
    }
  }
}

}  // namespace wmbench
