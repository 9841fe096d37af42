#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>
#include <thread>

#include "support.hpp"
#include "wmbench/error.hpp"
#include "wmbench/harness/session_server.hpp"

namespace wmbench {
namespace {

namespace fs = std::filesystem;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using json = nlohmann::json;
using P = ActionPrimitive;

SessionConfig small_config(const fs::path& save_dir) {
  SessionConfig c;
  c.world = {12, SceneCategory::Urban, 24000.0};
  c.resolution = {32, 24};
  c.save_dir = save_dir;
  return c;
}

TEST(SessionCore, SavedEpisodeRoundTrips) {
  testing::TempDir dir;
  SessionCore core(small_config(dir.path()));
  for (int i = 0; i < 24; ++i) core.tick(ActionVector{P::W});
  const fs::path saved = core.save();
  EXPECT_EQ(core.ticks(), 0u);  // restarted
  const Episode ep = read_episode(saved, {true, true});
  EXPECT_EQ(ep.actions, std::vector<ActionVector>(24, ActionVector{P::W}));
  EXPECT_EQ(ep.memory_len, 9);  // ceil(25 / 3)
  EXPECT_EQ(ep.predict_len, 16);
}

TEST(SessionCore, SplitRule) {
  testing::TempDir dir;
  SessionCore core(small_config(dir.path()));
  EXPECT_THROW(core.to_episode(), ConfigError);
  core.tick(ActionVector{});
  EXPECT_EQ(core.to_episode().memory_len, 1);
  EXPECT_EQ(core.to_episode().predict_len, 1);
  core.tick(ActionVector{});
  EXPECT_EQ(core.to_episode().memory_len, 1);
  EXPECT_EQ(core.to_episode().predict_len, 2);
}

TEST(SessionCore, DiscardWritesNothing) {
  testing::TempDir dir;
  SessionCore core(small_config(dir.path() / "saves"));
  for (int i = 0; i < 5; ++i) core.tick(ActionVector{P::D});
  core.discard();
  EXPECT_EQ(core.ticks(), 0u);
  EXPECT_FALSE(fs::exists(dir / "saves"));
  EXPECT_EQ(core.current_pose(), start_pose(build_world(core.config().world)));
}

TEST(SessionCore, ThirdPersonSaves) {
  testing::TempDir dir;
  SessionConfig c = small_config(dir.path());
  c.perspective = Perspective::ThirdPerson;
  SessionCore core(c);
  for (int i = 0; i < 6; ++i) core.tick(ActionVector{P::W, P::YawRight});
  const Episode ep = read_episode(core.save(), {true, true});
  EXPECT_TRUE(ep.character_poses.has_value());
}

TEST(ActionMailbox, LatestValueAndPersistence) {
  ActionMailbox box;
  EXPECT_TRUE(box.take().empty());
  box.put(ActionVector{P::W});
  box.put(ActionVector{P::W, P::YawRight});
  EXPECT_EQ(box.take(), (ActionVector{P::W, P::YawRight}));
  EXPECT_EQ(box.take(), (ActionVector{P::W, P::YawRight}));  // held keys stay held
}

// Headless websocket client against a live server.
class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    net::ip::tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  /// Next text message as JSON; binary messages are returned in `png`.
  json read_event() {
    while (true) {
      beast::flat_buffer buf;
      ws_.read(buf);
      if (ws_.got_binary()) {
        png = beast::buffers_to_string(buf.data());
        ++pngs;
        continue;
      }
      return json::parse(beast::buffers_to_string(buf.data()));
    }
  }

  json read_until(const std::string& event) {
    while (true) {
      json j = read_event();
      if (j.at("event") == event) return j;
    }
  }

  void send(const std::string& text) {
    ws_.text(true);
    ws_.write(net::buffer(text));
  }

  void close() { ws_.close(websocket::close_code::normal); }

  std::string png;
  int pngs = 0;

 private:
  net::io_context ioc_;
  websocket::stream<net::ip::tcp::socket> ws_;
};

class ServerFixture : public ::testing::Test {
 protected:
  void start(SessionConfig cfg) {
    server = std::make_unique<SessionServer>(cfg);
    thread = std::thread([this] { server->run(); });
  }
  void TearDown() override {
    if (server) server->stop();
    if (thread.joinable()) thread.join();
  }

  testing::TempDir dir;
  std::unique_ptr<SessionServer> server;
  std::thread thread;
};

TEST_F(ServerFixture, LockstepForwardRunThenSave) {
  SessionConfig c = small_config(dir / "saves");
  c.lockstep = true;
  start(c);
  Client client(server->port());
  const json hello = client.read_event();
  EXPECT_EQ(hello.at("event"), "hello");
  EXPECT_EQ(hello.at("perspective"), "first");
  EXPECT_EQ(hello.at("width"), 32);
  EXPECT_EQ(client.read_event().at("tick"), 0);

  const int w = ActionVector{P::W}.mask();
  for (int i = 0; i < 24; ++i) {
    client.send(json{{"tick", i}, {"mask", w}}.dump());
    const json frame = client.read_until("frame");
    EXPECT_EQ(frame.at("tick"), i + 1);
    EXPECT_EQ(frame.at("mask"), w);
  }
  client.send("save");
  const json saved = client.read_until("saved");
  EXPECT_EQ(saved.at("frames"), 25);
  const Episode ep = read_episode(saved.at("path").get<std::string>(), {true, true});
  EXPECT_EQ(ep.actions, std::vector<ActionVector>(24, ActionVector{P::W}));
  // the binary after the last frame event is the tick-24 image
  EXPECT_EQ(client.pngs, 25);
  const std::vector<std::uint8_t> bytes(client.png.begin(), client.png.end());
  EXPECT_TRUE(decode_png(bytes).same_pixels(ep.frames.back()));
}

TEST_F(ServerFixture, ChordsAndIdleGapsAreLoggedFrameForFrame) {
  SessionConfig c = small_config(dir / "saves");
  c.lockstep = true;
  start(c);
  Client client(server->port());
  client.read_until("frame");
  std::vector<ActionVector> sent;
  for (int i = 0; i < 30; ++i) {
    const ActionVector a = (i / 5) % 2 ? ActionVector{} : ActionVector{P::W, P::YawRight};
    sent.push_back(a);
    client.send(json{{"tick", i}, {"mask", a.mask()}}.dump());
    client.read_until("frame");
  }
  client.send(R"({"cmd":"save"})");
  const Episode ep = read_episode(client.read_until("saved").at("path").get<std::string>(), {true, true});
  EXPECT_EQ(ep.actions, sent);
}

TEST_F(ServerFixture, NoInputRecordsIdleTicks) {
  SessionConfig c = small_config(dir / "saves");
  c.tick_hz = 100.0;
  start(c);
  Client client(server->port());
  client.read_until("hello");
  for (int i = 0; i < 6; ++i) client.read_until("frame");
  client.send("save");
  const json saved = client.read_until("saved");
  const Episode ep = read_episode(saved.at("path").get<std::string>(), {false, false});
  EXPECT_GE(ep.actions.size(), 5u);
  for (auto a : ep.actions) EXPECT_TRUE(a.empty());
}

TEST_F(ServerFixture, RejectsBadMessagesAndPerspectiveChange) {
  SessionConfig c = small_config(dir / "saves");
  c.lockstep = true;
  start(c);
  Client client(server->port());
  client.read_until("frame");
  client.send(R"({"cmd":"set_perspective","perspective":"third"})");
  EXPECT_EQ(client.read_event().at("event"), "error");
  client.send(R"({"tick":0,"mask":300})");
  EXPECT_EQ(client.read_event().at("event"), "error");
  client.send("{oops");
  EXPECT_EQ(client.read_event().at("event"), "error");
  client.send("save");  // nothing recorded yet
  EXPECT_EQ(client.read_event().at("event"), "error");
  client.send(R"({"tick":0,"mask":1})");
  EXPECT_EQ(client.read_until("frame").at("tick"), 1);
  client.send("discard");
  EXPECT_EQ(client.read_until("discarded").at("event"), "discarded");
  EXPECT_EQ(client.read_until("frame").at("tick"), 0);
  EXPECT_FALSE(fs::exists(dir / "saves"));
}

TEST_F(ServerFixture, SecondClientIsTurnedAway) {
  SessionConfig c = small_config(dir / "saves");
  c.lockstep = true;
  start(c);
  Client first(server->port());
  first.read_until("frame");
  Client second(server->port());
  const json j = second.read_event();
  EXPECT_EQ(j.at("event"), "error");
  // the first session is unaffected
  first.send(R"({"tick":0,"mask":2})");
  EXPECT_EQ(first.read_until("frame").at("tick"), 1);
}

TEST_F(ServerFixture, DisconnectDiscardsAndNextClientStartsFresh) {
  SessionConfig c = small_config(dir / "saves");
  c.lockstep = true;
  start(c);
  {
    Client a(server->port());
    a.read_until("frame");
    a.send(R"({"tick":0,"mask":1})");
    a.read_until("frame");
    a.close();
  }
  // the server notices the close asynchronously; retry until it lets us in
  for (int attempt = 0; attempt < 100; ++attempt) {
    Client b(server->port());
    const json j = b.read_event();
    if (j.at("event") == "hello") {
      EXPECT_EQ(b.read_event().at("tick"), 0);
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  FAIL() << "server never accepted a new session";
}

TEST(SessionServer, PortInUseIsAnError) {
  testing::TempDir dir;
  SessionServer a(small_config(dir.path()));
  SessionConfig c = small_config(dir.path());
  c.port = a.port();
  EXPECT_THROW(SessionServer{c}, Error);
}

}  // namespace
}  // namespace wmbench
