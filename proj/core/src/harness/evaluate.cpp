#include "wmbench/harness/evaluate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "wmbench/parallel.hpp"

namespace wmbench {

namespace fs = std::filesystem;

namespace {

struct EpisodeOutcome {
  std::optional<EpisodeResult> result;
  std::vector<EpisodeFailure> failures;
  bool rpe_missing = false;
};

std::span<const Frame> targets(const Episode& ep) {
  return std::span<const Frame>(ep.frames).subspan(std::size_t(ep.memory_len), std::size_t(ep.predict_len));
}

PoseTrajectory reference_window(const Episode& ep) {
  const std::size_t first = std::size_t(ep.memory_len - 1);
  const auto poses = std::span<const Pose>(ep.camera_poses).subspan(first, std::size_t(ep.predict_len) + 1);
  return to_trajectory(poses, ep.fps, first);
}

// RPE of a model trajectory against the ground-truth window. Trajectories
// from outside the process live in an arbitrary frame and scale, so they
// are Sim(3)-aligned first; in-process ones are already in world units.
RpeResult score_rpe(const PoseTrajectory& est, bool external, const Episode& ep, int delta) {
  const PoseTrajectory ref = reference_window(ep);
  est.validate();
  if (!external) return rpe(est, ref, delta);
  const AlignmentResult a = align_trajectories(est, ref);
  return rpe(apply_alignment(a.transform, est), ref, delta);
}

EpisodeFailure failure(const ManifestEntry& e, const std::string& stage, const std::exception& ex) {
  std::string kind = "error";
  if (auto* a = dynamic_cast<const AdapterError*>(&ex)) kind = std::string(name(a->kind()));
  else if (dynamic_cast<const IntegrityError*>(&ex)) kind = "integrity";
  else if (dynamic_cast<const FormatError*>(&ex)) kind = "format";
  return {e.id, stage, kind, ex.what()};
}

EpisodeOutcome evaluate_episode(const ManifestEntry& e, const fs::path& root, ModelAdapter& adapter,
                                const EvalConfig& cfg) {
  EpisodeOutcome out;
  Episode ep;
  std::optional<World> world;
  try {
    ReadOptions ro;
    ro.rerender = cfg.verify_frames;
    ep = read_episode(root / e.path, ro);
    if (adapter.wants_hint()) world = build_world(ep.world);
  } catch (const std::exception& ex) {
    out.failures.push_back(failure(e, "load", ex));
    return out;
  }
  const World* wp = world ? &*world : nullptr;

  EpisodeResult r;
  r.episode = e.id;
  r.suite = e.suite;
  r.preset = e.preset;
  r.perspective = std::string(name(e.perspective));
  const std::string stage_model = "model";
  try {
    if (e.suite == suite::kMirror) {
      const MirrorScore m = score_mirror_probe(adapter, ep, e.mirror_leg, e.id, wp);
      r.scores[dim::kGsc] = m.gsc;
    } else {
      const Prediction pred = run_model(adapter, ep, e.id, wp);
      if (e.suite == suite::kGeneralization) {
        r.scores[dim::kAsg] = action_space_generalization(pred.frames, targets(ep));
      } else {
        r.scores[dim::kLcm] = long_context_memory(pred.frames, targets(ep));
        std::optional<PoseTrajectory> est;
        bool external = adapter.mode() != "in-process";
        if (cfg.poses_dir) {
          const fs::path f = *cfg.poses_dir / (e.id + ".tum");
          if (fs::exists(f)) {
            est = read_tum(f);
            external = true;
          }
        }
        if (!est && pred.trajectory) est = pred.trajectory;
        if (!est) {
          out.rpe_missing = true;
          out.failures.push_back({e.id, "rpe", "missing-trajectory",
                                  "no camera trajectory supplied for this episode"});
        } else {
          try {
            const RpeResult rr = score_rpe(*est, external, ep, cfg.rpe_delta);
            r.scores[dim::kRpeTrans] = rr.trans_rmse;
            r.scores[dim::kRpeRot] = rr.rot_rmse;
          } catch (const std::exception& ex) {
            out.rpe_missing = true;
            out.failures.push_back(failure(e, "rpe", ex));
          }
        }
      }
    }
  } catch (const std::exception& ex) {
    out.failures.push_back(failure(e, stage_model, ex));
    return out;
  }
  out.result = std::move(r);
  return out;
}

}  // namespace

const MetricReport* EvaluationReport::perspective(const std::string& p) const {
  for (const auto& r : perspectives) {
    if (r.perspective == p) return &r;
  }
  return nullptr;
}

MirrorScore score_mirror_probe(ModelAdapter& adapter, const Episode& ep, int leg,
                               const std::string& episode_id, const World* world) {
  const std::size_t T = std::size_t(ep.memory_len);
  const std::size_t F = std::size_t(leg);
  if (leg < 1 || ep.predict_len != 2 * leg) {
    throw ConfigError("mirror probe " + episode_id + ": prediction length must be twice the leg");
  }
  const auto& agents = ep.agent_poses();

  PredictionRequest fwd;
  fwd.episode_id = episode_id;
  fwd.context.assign(ep.frames.begin(), ep.frames.begin() + long(T));
  fwd.actions.assign(ep.actions.begin() + long(T - 1), ep.actions.begin() + long(T - 1 + F));
  fwd.k = leg;
  fwd.resolution = ep.resolution;
  fwd.fps = ep.fps;
  fwd.first_frame_index = T;
  if (world) fwd.hint = OracleHint{world, ep.cfg, ep.perspective, agents[T - 1]};

  MirrorScore out;
  out.forward = run_request(adapter, fwd);

  PredictionRequest rev = fwd;
  rev.context.insert(rev.context.end(), out.forward.frames.begin(), out.forward.frames.end());
  rev.actions.assign(ep.actions.begin() + long(T - 1 + F), ep.actions.begin() + long(T - 1 + 2 * F));
  rev.first_frame_index = T + F;
  if (world) {
    const Pose anchor = out.forward.agent_poses ? out.forward.agent_poses->back() : agents[T - 1 + F];
    rev.hint = OracleHint{world, ep.cfg, ep.perspective, anchor};
  }
  out.reverse = run_request(adapter, std::move(rev));

  // fwd_list[i] and rev_list[F-1-i] share the ground-truth pose of frame T-1+i.
  std::vector<Frame> fwd_list;
  fwd_list.reserve(F);
  fwd_list.push_back(ep.frames[T - 1]);
  fwd_list.insert(fwd_list.end(), out.forward.frames.begin(), out.forward.frames.end() - 1);
  out.gsc = generated_scene_consistency(fwd_list, out.reverse.frames);
  return out;
}

EvaluationReport evaluate(const DatasetManifest& manifest, const fs::path& root, ModelAdapter& adapter,
                          const EvalConfig& cfg) {
  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.episodes) {
    if (e.split != "test") continue;
    if (!cfg.suites.empty() && std::find(cfg.suites.begin(), cfg.suites.end(), e.suite) == cfg.suites.end()) {
      continue;
    }
    selected.push_back(&e);
  }
  if (selected.empty()) throw ConfigError("no test episodes selected for evaluation");

  std::vector<EpisodeOutcome> outcomes(selected.size());
  parallel_for(
      selected.size(),
      [&](std::size_t i) { outcomes[i] = evaluate_episode(*selected[i], root, adapter, cfg); },
      cfg.jobs);

  EvaluationReport rep;
  rep.model = adapter.label();
  rep.mode = adapter.mode();
  rep.context_policy = std::string(name(adapter.policy()));
  rep.dataset_seed = manifest.seed;

  // RPE is all-or-nothing per perspective so that every shared-action
  // episode carries the same dimensions.
  std::set<std::string> rpe_incomplete;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].rpe_missing) rpe_incomplete.insert(std::string(name(selected[i]->perspective)));
  }
  for (auto& o : outcomes) {
    rep.failures.insert(rep.failures.end(), o.failures.begin(), o.failures.end());
    if (!o.result) continue;
    if (rpe_incomplete.count(o.result->perspective)) {
      o.result->scores.erase(dim::kRpeTrans);
      o.result->scores.erase(dim::kRpeRot);
    }
    rep.episodes.push_back(std::move(*o.result));
  }
  if (rep.episodes.empty()) {
    throw Error("evaluation completed zero episodes (" + std::to_string(rep.failures.size()) + " failures; first: " +
                (rep.failures.empty() ? std::string("none") : rep.failures.front().message) + ")");
  }

  for (Perspective p : {Perspective::FirstPerson, Perspective::ThirdPerson}) {
    const std::string pname(name(p));
    std::vector<EpisodeResult> subset;
    for (const auto& r : rep.episodes) {
      if (r.perspective == pname) subset.push_back(r);
    }
    if (subset.empty()) continue;
    rep.perspectives.push_back(aggregate_report(subset, rep.model, rep.context_policy, pname));
  }
  return rep;
}

}  // namespace wmbench
