#include "wmbench/harness/session_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include <deque>

#include "wmbench/error.hpp"

namespace wmbench {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using json = nlohmann::ordered_json;

namespace {

struct Outgoing {
  bool binary = false;
  std::string payload;
};

json pose_json(const Pose& p) {
  return json{{"x", p.position.x}, {"y", p.position.y}, {"z", p.position.z}, {"yaw", p.yaw}, {"pitch", p.pitch}};
}

}  // namespace

struct SessionServer::Impl {
  class Connection;

  explicit Impl(SessionConfig c) : cfg(std::move(c)), core(cfg), acceptor(ioc) {
    boost::system::error_code ec;
    const auto addr = net::ip::make_address(cfg.host, ec);
    if (ec) throw ConfigError("invalid listen address '" + cfg.host + "'");
    const tcp::endpoint ep(addr, cfg.port);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port) + ": " + ec.message());
  }

  void accept();

  SessionConfig cfg;
  SessionCore core;
  ActionMailbox mailbox;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::weak_ptr<Connection> active;
};

class SessionServer::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(Impl& server, tcp::socket socket)
      : server_(server), ws_(std::move(socket)), timer_(server.ioc) {}

  void start(bool busy) {
    busy_ = busy;
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    if (busy_) {
      send_event({{"event", "error"}, {"message", "another session is active"}});
      closing_ = true;
      return;
    }
    SessionCore& core = server_.core;
    send_event({{"event", "hello"},
                {"perspective", std::string(name(core.perspective()))},
                {"preset", server_.cfg.preset},
                {"width", server_.cfg.resolution.width},
                {"height", server_.cfg.resolution.height},
                {"tick_hz", server_.cfg.tick_hz},
                {"lockstep", server_.cfg.lockstep}});
    send_frame(ActionVector{});
    read();
    if (!server_.cfg.lockstep) {
      next_tick_ = std::chrono::steady_clock::now();
      schedule_tick();
    }
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      on_disconnect();
      return;
    }
    const bool binary = ws_.got_binary();
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (binary) {
      send_error("binary messages are not accepted");
    } else {
      handle(text);
    }
    if (!closing_) read();
  }

  void handle(const std::string& raw) {
    const auto first = raw.find_first_not_of(" \t\r\n");
    const auto last = raw.find_last_not_of(" \t\r\n");
    const std::string text = first == std::string::npos ? "" : raw.substr(first, last - first + 1);
    if (text == "save" || text == "discard") {
      command(text);
      return;
    }
    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::exception&) {
      send_error("malformed message");
      return;
    }
    if (!msg.is_object()) {
      send_error("malformed message");
      return;
    }
    if (msg.contains("cmd")) {
      if (!msg["cmd"].is_string()) {
        send_error("cmd must be a string");
        return;
      }
      command(msg["cmd"].get<std::string>());
      return;
    }
    if (!msg.contains("mask") || !msg["mask"].is_number_integer()) {
      send_error("action message needs an integer mask");
      return;
    }
    const auto mask = msg["mask"].get<long long>();
    if (mask < 0 || mask > 255) {
      send_error("mask out of range");
      return;
    }
    server_.mailbox.put(ActionVector(std::uint8_t(mask)));
    if (server_.cfg.lockstep) do_tick();
  }

  void command(const std::string& cmd) {
    SessionCore& core = server_.core;
    if (cmd == "save") {
      try {
        const std::size_t frames = core.ticks() + 1;
        const auto path = core.save();
        send_event({{"event", "saved"}, {"path", path.string()}, {"frames", frames}});
      } catch (const std::exception& e) {
        send_error(e.what());
        return;
      }
      server_.mailbox.put(ActionVector{});
      send_frame(ActionVector{});
    } else if (cmd == "discard") {
      core.discard();
      server_.mailbox.put(ActionVector{});
      send_event({{"event", "discarded"}});
      send_frame(ActionVector{});
    } else if (cmd == "set_perspective") {
      send_error("perspective is fixed for the whole episode");
    } else {
      send_error("unknown command '" + cmd + "'");
    }
  }

  void schedule_tick() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / server_.cfg.tick_hz));
    next_tick_ += period;
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing_) return;
      self->do_tick();
      self->schedule_tick();
    });
  }

  void do_tick() {
    const ActionVector a = server_.mailbox.take();
    server_.core.tick(a);
    send_frame(a);
  }

  void send_frame(ActionVector a) {
    const SessionCore& core = server_.core;
    send_event({{"event", "frame"},
                {"tick", core.ticks()},
                {"mask", a.mask()},
                {"pose", pose_json(core.current_pose())}});
    const auto png = encode_png(core.current_frame());
    queue({true, std::string(png.begin(), png.end())});
  }

  void send_error(const std::string& message) { send_event({{"event", "error"}, {"message", message}}); }
  void send_event(const json& j) { queue({false, j.dump()}); }

  void queue(Outgoing msg) {
    outq_.push_back(std::move(msg));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outq_.empty()) {
      writing_ = false;
      if (closing_) {
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.binary(outq_.front().binary);
    ws_.async_write(net::buffer(outq_.front().payload),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->on_disconnect();
                        return;
                      }
                      self->outq_.pop_front();
                      self->write_next();
                    });
  }

  void on_disconnect() {
    if (closing_) return;
    closing_ = true;
    timer_.cancel();
    if (!busy_) {
      server_.core.discard();
      server_.mailbox.put(ActionVector{});
    }
  }

  Impl& server_;
  websocket::stream<tcp::socket> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> outq_;
  std::chrono::steady_clock::time_point next_tick_;
  bool writing_ = false;
  bool closing_ = false;
  bool busy_ = false;
};

void SessionServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    auto current = active.lock();
    auto conn = std::make_shared<Connection>(*this, std::move(socket));
    const bool busy = current != nullptr;
    if (!busy) active = conn;
    conn->start(busy);
    accept();
  });
}

SessionServer::SessionServer(SessionConfig cfg) {
  if (!(cfg.tick_hz > 0.0)) throw ConfigError("tick rate must be positive");
  impl_ = std::make_unique<Impl>(std::move(cfg));
}

SessionServer::~SessionServer() = default;

unsigned short SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
  impl_->accept();
  impl_->ioc.run();
}

void SessionServer::stop() { impl_->ioc.stop(); }

}  // namespace wmbench
