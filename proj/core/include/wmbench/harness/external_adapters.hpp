#pragma once

// Adapters for models that run as separate processes.
//
// Directory exchange: the command is run as `<cmd> <in_dir> <out_dir>`.
//   in_dir/memory/%06d.png   context frames (all of M, or only f_T)
//   in_dir/actions.jsonl     k ActionVector text forms, one JSON string per line
//   in_dir/request.json      {"k", "width", "height", "context_policy", "fps",
//                             "first_frame_index", "episode"}
//   out_dir/pred/%06d.png    k predicted frames, numbered from 0
//   out_dir/pred/poses.tum   optional camera trajectory (episode timestamps)
//   out_dir/done             sentinel written last
//
// Streaming: the command is run with pipes. Input on stdin is one JSON
// header line (as request.json plus "context_frames"), the context frames
// as raw RGB bytes, then k JSONL action lines. The model answers on stdout
// with one JSON line {"frames": k, "width": w, "height": h} followed by k
// raw RGB frames.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

#include "wmbench/harness/adapter.hpp"

namespace wmbench {

struct ProcessOptions {
  std::string command;  ///< run through /bin/sh -c
  std::string label;
  ContextPolicy policy = ContextPolicy::WithMemory;
  /// Budget per predicted frame; the whole call may take k times this plus startup.
  std::chrono::milliseconds frame_timeout{10000};
  std::chrono::milliseconds startup_timeout{10000};
};

class DirectoryAdapter : public ModelAdapter {
 public:
  /// Exchange directories are created under `work_dir`, one per call.
  DirectoryAdapter(ProcessOptions opts, std::filesystem::path work_dir, bool keep_files = false);

  std::string label() const override { return opts_.label; }
  std::string mode() const override { return "directory-exchange"; }
  ContextPolicy policy() const override { return opts_.policy; }
  Prediction predict(const PredictionRequest& request) override;

 private:
  ProcessOptions opts_;
  std::filesystem::path work_dir_;
  bool keep_files_;
  std::atomic<unsigned> calls_{0};
};

class StreamingAdapter : public ModelAdapter {
 public:
  explicit StreamingAdapter(ProcessOptions opts);

  std::string label() const override { return opts_.label; }
  std::string mode() const override { return "streaming"; }
  ContextPolicy policy() const override { return opts_.policy; }
  Prediction predict(const PredictionRequest& request) override;

 private:
  ProcessOptions opts_;
};

/// JSON request header shared by both protocols.
std::string request_header_json(const PredictionRequest& request);

}  // namespace wmbench
