#include "wmbench/harness/external_adapters.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <optional>
#include <regex>
#include <thread>

namespace wmbench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

// A child process in its own process group, killed and reaped on destruction.
class Child {
 public:
  Child(const std::string& command, const std::vector<std::string>& args, bool pipes) {
    int to_child[2] = {-1, -1};
    int from_child[2] = {-1, -1};
    if (pipes) {
      if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
        throw Error(std::string("pipe: ") + std::strerror(errno));
      }
    }
    std::vector<std::string> argv_s{"/bin/sh", "-c", command + " \"$@\"", "sh"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::setpgid(0, 0);
      if (pipes) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
      } else {
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
      }
      ::execv("/bin/sh", argv.data());
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    if (pipes) {
      ::close(to_child[0]);
      ::close(from_child[1]);
      in_ = to_child[1];
      out_ = from_child[0];
      ::fcntl(in_, F_SETFL, ::fcntl(in_, F_GETFL) | O_NONBLOCK);
      ::fcntl(out_, F_SETFL, ::fcntl(out_, F_GETFL) | O_NONBLOCK);
    }
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child() {
    close_stdin();
    if (out_ >= 0) ::close(out_);
    kill_and_reap();
  }

  int stdin_fd() const { return in_; }
  int stdout_fd() const { return out_; }
  void close_stdin() {
    if (in_ >= 0) ::close(in_);
    in_ = -1;
  }

  /// Exit status once the child has exited.
  std::optional<int> poll_exit() {
    if (status_) return status_;
    int st = 0;
    if (::waitpid(pid_, &st, WNOHANG) == pid_) {
      status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
    }
    return status_;
  }

  void kill_and_reap() {
    if (status_) return;
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int st = 0;
    ::waitpid(pid_, &st, 0);
    status_ = 128 + SIGKILL;
  }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::optional<int> status_;
};

int ms_until(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return int(std::max<long long>(0, left.count()));
}

void write_all(int fd, const std::uint8_t* data, std::size_t n, Clock::time_point deadline) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w > 0) {
      data += w;
      n -= std::size_t(w);
      continue;
    }
    if (w < 0 && errno == EPIPE) {
      throw AdapterError(AdapterErrorKind::Protocol, "model closed its input before reading the request");
    }
    if (w < 0 && errno != EAGAIN && errno != EINTR) {
      throw AdapterError(AdapterErrorKind::Protocol, std::string("write to model: ") + std::strerror(errno));
    }
    pollfd p{fd, POLLOUT, 0};
    const int left = ms_until(deadline);
    if (left == 0 || ::poll(&p, 1, left) == 0) {
      throw AdapterError(AdapterErrorKind::Timeout, "model did not accept its input in time");
    }
  }
}

/// Reads up to n bytes; returns fewer only at end of stream.
std::size_t read_exact(int fd, std::uint8_t* data, std::size_t n, Clock::time_point deadline,
                       const char* what) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(fd, data + got, n - got);
    if (r > 0) {
      got += std::size_t(r);
      continue;
    }
    if (r == 0) return got;
    if (errno != EAGAIN && errno != EINTR) {
      throw AdapterError(AdapterErrorKind::Protocol, std::string("read from model: ") + std::strerror(errno));
    }
    pollfd p{fd, POLLIN, 0};
    const int left = ms_until(deadline);
    if (left == 0 || ::poll(&p, 1, left) == 0) {
      throw AdapterError(AdapterErrorKind::Timeout, std::string("no ") + what + " within the time limit");
    }
  }
  return got;
}

std::string read_line(int fd, Clock::time_point deadline, std::size_t max_len) {
  std::string line;
  std::uint8_t c = 0;
  while (true) {
    if (read_exact(fd, &c, 1, deadline, "response header") == 0) {
      throw AdapterError(AdapterErrorKind::Protocol, "model closed its output before the response header");
    }
    if (c == '\n') return line;
    line.push_back(char(c));
    if (line.size() > max_len) throw AdapterError(AdapterErrorKind::Protocol, "response header too long");
  }
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
  return out.empty() ? "request" : out;
}

json header_object(const PredictionRequest& r) {
  json j;
  j["episode"] = r.episode_id;
  j["k"] = r.k;
  j["width"] = r.resolution.width;
  j["height"] = r.resolution.height;
  j["context_policy"] = std::string(name(r.policy));
  j["context_frames"] = r.context.size();
  j["fps"] = r.fps;
  j["first_frame_index"] = r.first_frame_index;
  return j;
}

}  // namespace

std::string request_header_json(const PredictionRequest& request) { return header_object(request).dump(); }

// ---------------------------------------------------------------------------

DirectoryAdapter::DirectoryAdapter(ProcessOptions opts, fs::path work_dir, bool keep_files)
    : opts_(std::move(opts)), work_dir_(std::move(work_dir)), keep_files_(keep_files) {
  if (opts_.command.empty()) throw ConfigError("model command is empty");
  if (opts_.label.empty()) opts_.label = opts_.command;
}

Prediction DirectoryAdapter::predict(const PredictionRequest& req) {
  const fs::path dir = work_dir_ / (sanitize(req.episode_id) + "-" + std::to_string(calls_++));
  const fs::path in_dir = dir / "in";
  const fs::path out_dir = dir / "out";
  fs::remove_all(dir);
  fs::create_directories(in_dir / "memory");
  fs::create_directories(out_dir);

  struct Cleanup {
    fs::path dir;
    bool keep;
    ~Cleanup() {
      std::error_code ec;
      if (!keep) fs::remove_all(dir, ec);
    }
  } cleanup{dir, keep_files_};

  for (std::size_t i = 0; i < req.context.size(); ++i) {
    write_png(req.context[i], in_dir / "memory" / frame_filename(i));
  }
  {
    std::ofstream out(in_dir / "actions.jsonl");
    for (auto a : req.actions) out << json(a.to_text()).dump() << '\n';
  }
  {
    json j = header_object(req);
    std::ofstream out(in_dir / "request.json");
    out << j.dump(2) << '\n';
  }

  const auto deadline = Clock::now() + opts_.startup_timeout + opts_.frame_timeout * req.k;
  Child child(opts_.command, {in_dir.string(), out_dir.string()}, false);
  const fs::path done = out_dir / "done";
  while (true) {
    if (fs::exists(done)) break;
    if (auto status = child.poll_exit()) {
      if (fs::exists(done)) break;
      throw AdapterError(AdapterErrorKind::Protocol,
                         "model exited with status " + std::to_string(*status) + " without writing done");
    }
    if (Clock::now() >= deadline) {
      child.kill_and_reap();
      throw AdapterError(AdapterErrorKind::Timeout,
                         "no done sentinel within " +
                             std::to_string((opts_.startup_timeout + opts_.frame_timeout * req.k).count()) +
                             " ms");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  const auto grace = Clock::now() + std::chrono::seconds(2);
  while (!child.poll_exit() && Clock::now() < grace) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  child.kill_and_reap();

  const fs::path pred = out_dir / "pred";
  static const std::regex frame_name("[0-9]{6}\\.png");
  std::size_t count = 0;
  if (fs::is_directory(pred)) {
    for (const auto& entry : fs::directory_iterator(pred)) {
      if (std::regex_match(entry.path().filename().string(), frame_name)) ++count;
    }
  }
  if (count != std::size_t(req.k)) {
    throw AdapterError(AdapterErrorKind::FrameCount,
                       "expected " + std::to_string(req.k) + " frames, got " + std::to_string(count));
  }
  Prediction p;
  p.frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const fs::path f = pred / frame_filename(i);
    if (!fs::exists(f)) throw AdapterError(AdapterErrorKind::Protocol, "missing " + f.filename().string());
    try {
      p.frames.push_back(read_png(f));
    } catch (const Error& e) {
      throw AdapterError(AdapterErrorKind::Protocol, "undecodable " + f.filename().string() + ": " + e.what());
    }
    p.frames.back().frame_index = int(req.first_frame_index + i);
  }
  const fs::path tum = pred / "poses.tum";
  if (fs::exists(tum)) {
    try {
      p.trajectory = read_tum(tum);
    } catch (const Error& e) {
      throw AdapterError(AdapterErrorKind::Protocol, std::string("bad poses.tum: ") + e.what());
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

StreamingAdapter::StreamingAdapter(ProcessOptions opts) : opts_(std::move(opts)) {
  if (opts_.command.empty()) throw ConfigError("model command is empty");
  if (opts_.label.empty()) opts_.label = opts_.command;
}

Prediction StreamingAdapter::predict(const PredictionRequest& req) {
  ignore_sigpipe();
  Child child(opts_.command, {}, true);

  auto deadline = Clock::now() + opts_.startup_timeout + opts_.frame_timeout * long(req.context.size());
  const std::string header = header_object(req).dump() + "\n";
  write_all(child.stdin_fd(), reinterpret_cast<const std::uint8_t*>(header.data()), header.size(), deadline);
  for (const auto& f : req.context) write_all(child.stdin_fd(), f.pixels.data(), f.pixels.size(), deadline);
  std::string actions;
  for (auto a : req.actions) actions += json(a.to_text()).dump() + "\n";
  write_all(child.stdin_fd(), reinterpret_cast<const std::uint8_t*>(actions.data()), actions.size(), deadline);
  child.close_stdin();

  deadline = Clock::now() + opts_.startup_timeout + opts_.frame_timeout;
  const std::string reply = read_line(child.stdout_fd(), deadline, 4096);
  int frames = 0, width = 0, height = 0;
  try {
    const json j = json::parse(reply);
    frames = j.at("frames").get<int>();
    width = j.at("width").get<int>();
    height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception&) {
    throw AdapterError(AdapterErrorKind::Protocol, "malformed response header");
  }
  if (frames != req.k) {
    throw AdapterError(AdapterErrorKind::FrameCount,
                       "expected " + std::to_string(req.k) + " frames, model announced " + std::to_string(frames));
  }
  if (width != req.resolution.width || height != req.resolution.height) {
    throw AdapterError(AdapterErrorKind::Resolution,
                       "model announced " + std::to_string(width) + "x" + std::to_string(height) +
                           ", expected " + std::to_string(req.resolution.width) + "x" +
                           std::to_string(req.resolution.height));
  }
  Prediction p;
  for (int i = 0; i < frames; ++i) {
    Frame f(width, height, int(req.first_frame_index) + i);
    deadline = Clock::now() + opts_.frame_timeout;
    const std::size_t got = read_exact(child.stdout_fd(), f.pixels.data(), f.pixels.size(), deadline, "frame");
    if (got == 0) {
      throw AdapterError(AdapterErrorKind::FrameCount,
                         "expected " + std::to_string(req.k) + " frames, got " + std::to_string(i));
    }
    if (got < f.pixels.size()) {
      throw AdapterError(AdapterErrorKind::Protocol, "stream ended inside frame " + std::to_string(i));
    }
    p.frames.push_back(std::move(f));
  }
  return p;
}

}  // namespace wmbench
