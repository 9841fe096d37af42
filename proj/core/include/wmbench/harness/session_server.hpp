#pragma once

// Websocket transport for a live recording session.
//
// Server -> client:
//   text   {"event":"hello", "perspective", "preset", "width", "height", "tick_hz", "lockstep"}
//   text   {"event":"frame", "tick", "mask", "pose":{x,y,z,yaw,pitch}} followed by
//   binary PNG of that frame
//   text   {"event":"saved", "path", "frames"} | {"event":"discarded"} | {"event":"error", "message"}
// Client -> server (text):
//   {"tick": n, "mask": m}          currently held keys (ActionVector wire byte)
//   {"cmd":"save"} or "save"       persist the episode and start a new one
//   {"cmd":"discard"} or "discard" drop the recording and start a new one
// One client at a time; a disconnect discards an unsaved recording.

#include <memory>

#include "wmbench/harness/session.hpp"

namespace wmbench {

class SessionServer {
 public:
  /// Binds immediately; throws Error when the port is unavailable.
  explicit SessionServer(SessionConfig cfg);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  unsigned short port() const;
  /// Serves until stop() is called.
  void run();
  /// Safe to call from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wmbench
