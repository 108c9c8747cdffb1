// Copyright 2026 The hitl-workbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hitl/live_server.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

namespace hitl {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kWindow = 3;

class RunningServer {
 public:
  explicit RunningServer(ServerOptions options = {}) : server_(WithFreePort(options)) {
    thread_ = std::thread([this] { server_.Run(); });
  }
  ~RunningServer() {
    server_.Stop();
    thread_.join();
  }
  uint16_t port() const { return server_.port(); }

 private:
  static ServerOptions WithFreePort(ServerOptions options) {
    options.port = 0;
    return options;
  }
  LiveServer server_;
  std::thread thread_;
};

class WsTestClient {
 public:
  WsTestClient(uint16_t port, const std::string& path) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", path);
    ws_.text(true);
  }
  void Send(const json& msg) { ws_.write(net::buffer(msg.dump())); }
  void SendRaw(const std::string& text) { ws_.write(net::buffer(text)); }
  json Read() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
  // Next message of `type`, skipping others into `skipped`.
  json ReadType(const std::string& type, std::vector<json>* skipped = nullptr) {
    for (;;) {
      json msg = Read();
      if (msg["type"] == type) return msg;
      if (skipped) skipped->push_back(std::move(msg));
    }
  }
  beast::error_code ReadError() {
    beast::flat_buffer buffer;
    beast::error_code ec;
    ws_.read(buffer, ec);
    return ec;
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

http::response<http::string_body> HttpGet(uint16_t port, const std::string& target) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  tcp::resolver resolver(ioc);
  net::connect(socket, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.keep_alive(false);
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  return res;
}

json Control(const std::string& command) { return {{"type", "control"}, {"command", command}}; }

json SetSpeed(int tick_ms) {
  json msg = Control("set_speed");
  msg["tick_ms"] = tick_ms;
  return msg;
}

TEST(LiveServerTest, HealthzReportsOk) {
  RunningServer server;
  const auto res = HttpGet(server.port(), "/healthz");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res[http::field::content_type], "application/json");
  const json body = json::parse(res.body());
  EXPECT_EQ(body["status"], "ok");
  EXPECT_EQ(body["sessions"], 0);
}

TEST(LiveServerTest, ServesStaticFiles) {
  const auto root = std::filesystem::temp_directory_path() / "hitl_live_static";
  std::filesystem::create_directories(root / "assets");
  std::ofstream(root / "index.html") << "<html>maze</html>";
  std::ofstream(root / "assets" / "app.js") << "console.log(1);";
  ServerOptions options;
  options.static_dir = root.string();
  RunningServer server(options);

  auto res = HttpGet(server.port(), "/");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res.body(), "<html>maze</html>");
  EXPECT_EQ(res[http::field::content_type], "text/html");
  res = HttpGet(server.port(), "/assets/app.js?v=2");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res.body(), "console.log(1);");
  EXPECT_EQ(res[http::field::content_type], "application/javascript");
  EXPECT_EQ(HttpGet(server.port(), "/missing.css").result(), http::status::not_found);
  EXPECT_EQ(HttpGet(server.port(), "/../etc/passwd").result(), http::status::not_found);
  EXPECT_EQ(HttpGet(server.port(), "/session/a").result(), http::status::upgrade_required);
  std::filesystem::remove_all(root);
}

TEST(LiveServerTest, NoStaticDirMeansNotFound) {
  RunningServer server;
  EXPECT_EQ(HttpGet(server.port(), "/index.html").result(), http::status::not_found);
}

TEST(LiveServerTest, ConnectSendsLatestSnapshot) {
  RunningServer server;
  WsTestClient client(server.port(), "/session/alpha");
  const json snap = client.Read();
  EXPECT_EQ(snap["type"], "snapshot");
  EXPECT_EQ(snap["session"], "alpha");
  EXPECT_EQ(snap["seq"], 0);
  EXPECT_EQ(snap["status"], "paused");
  EXPECT_EQ(json::parse(HttpGet(server.port(), "/healthz").body())["sessions"], 1);
}

// Scripted operator: 50 ticks at 100 ms with 10 feedback messages.
TEST(LiveServerTest, ScriptedClientLiveLoop) {
  RunningServer server;
  WsTestClient client(server.port(), "/session/live");
  const json initial = client.Read();
  const int64_t d_global_before = initial["d_global_size"];

  client.Send(SetSpeed(100));
  EXPECT_EQ(client.ReadType("ack")["tick_ms"], 100);
  client.Send(Control("start"));
  EXPECT_EQ(client.ReadType("ack")["status"], "running");

  std::vector<json> snapshots;
  std::vector<json> feedback_acks;
  std::vector<Clock::time_point> arrivals;
  int sent = 0;
  bool want_feedback = false;
  while (snapshots.size() < 50) {
    const json msg = client.Read();
    if (msg["type"] == "ack") {
      feedback_acks.push_back(msg);
      continue;
    }
    ASSERT_EQ(msg["type"], "snapshot") << msg;
    snapshots.push_back(msg);
    arrivals.push_back(Clock::now());
    if (snapshots.size() % 4 == 0 && sent < 10) want_feedback = true;
    // Feedback sent mid-episode lands on a step with a full credit window.
    if (want_feedback && msg["step"].get<int>() >= kWindow - 1 && !msg["done"].get<bool>()) {
      client.Send({{"type", "feedback"}, {"polarity", sent % 2 ? -1 : 1}, {"client_ts", sent}});
      ++sent;
      want_feedback = false;
    }
  }
  // The pause ack comes after replies to everything sent earlier.
  client.Send(Control("pause"));
  for (;;) {
    const json msg = client.Read();
    if (msg["type"] == "snapshot") {
      snapshots.push_back(msg);
    } else if (msg["for"] == "feedback") {
      feedback_acks.push_back(msg);
    } else {
      EXPECT_EQ(msg["command"], "pause");
      break;
    }
  }

  ASSERT_EQ(sent, 10);
  ASSERT_EQ(feedback_acks.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(feedback_acks[i]["for"], "feedback");
    EXPECT_EQ(feedback_acks[i]["feedback_id"], i);
    EXPECT_EQ(feedback_acks[i]["client_ts"], i);
  }

  // Gapless sequence numbers following the one seen on connect.
  for (size_t i = 0; i < snapshots.size(); ++i) {
    EXPECT_EQ(snapshots[i]["seq"], initial["seq"].get<int64_t>() + 1 + static_cast<int64_t>(i));
  }

  // Every feedback credited exactly once, where its ack said it would be.
  std::map<int64_t, json> credited;
  for (const json& snap : snapshots) {
    for (const json& a : snap["acks"]) {
      EXPECT_TRUE(credited.emplace(a["feedback_id"].get<int64_t>(), a).second);
    }
  }
  ASSERT_EQ(credited.size(), 10u);
  int64_t expected_growth = 0;
  for (const json& ack : feedback_acks) {
    const json& c = credited.at(ack["feedback_id"].get<int64_t>());
    EXPECT_EQ(c["episode"], ack["episode"]);
    EXPECT_EQ(c["step"], ack["step"]);
    expected_growth += std::min(ack["step"].get<int>() + 1, kWindow);
  }
  const int64_t growth = snapshots.back()["d_global_size"].get<int64_t>() - d_global_before;
  EXPECT_EQ(growth, expected_growth);
  EXPECT_EQ(growth, kWindow * 10);

  const double mean_ms =
      std::chrono::duration<double, std::milli>(arrivals[49] - arrivals[0]).count() / 49.0;
  EXPECT_NEAR(mean_ms, 100.0, 20.0);
}

TEST(LiveServerTest, TwoClientsReceiveIdenticalSnapshots) {
  RunningServer server;
  WsTestClient a(server.port(), "/session/shared");
  a.Read();
  a.Send(SetSpeed(20));
  a.ReadType("ack");
  WsTestClient b(server.port(), "/session/shared");
  const json b_first = b.Read();
  a.Send(Control("start"));
  a.ReadType("ack");
  json sa = a.ReadType("snapshot");
  json sb = b.ReadType("snapshot");
  // Align on the first sequence number both have seen.
  while (sb["seq"] < sa["seq"]) sb = b.ReadType("snapshot");
  while (sa["seq"] < sb["seq"]) sa = a.ReadType("snapshot");
  EXPECT_GE(sa["seq"].get<int64_t>(), b_first["seq"].get<int64_t>() + 1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(sa, sb);
    sa = a.ReadType("snapshot");
    sb = b.ReadType("snapshot");
  }
}

TEST(LiveServerTest, InvalidMessagesGetErrorsAndConnectionSurvives) {
  RunningServer server;
  WsTestClient client(server.port(), "/session/x");
  client.Read();
  client.Send({{"type", "feedback"}, {"polarity", 0}});
  json reply = client.Read();
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["code"], "bad_polarity");
  client.SendRaw("not json");
  EXPECT_EQ(client.Read()["code"], "bad_json");
  client.Send(SetSpeed(1));
  EXPECT_EQ(client.Read()["code"], "bad_argument");
  client.Send({{"type", "feedback"}, {"polarity", -1}});
  reply = client.Read();
  EXPECT_EQ(reply["type"], "ack");
  EXPECT_EQ(reply["feedback_id"], 0);
}

TEST(LiveServerTest, PauseResumeKeepsSequenceGapless) {
  RunningServer server;
  WsTestClient client(server.port(), "/session/p");
  int64_t expected = client.Read()["seq"].get<int64_t>() + 1;
  client.Send(SetSpeed(20));
  client.ReadType("ack");
  for (int round = 0; round < 3; ++round) {
    client.Send(Control("start"));
    std::vector<json> seen;
    client.ReadType("ack", &seen);
    for (int i = 0; i < 5; ++i) seen.push_back(client.ReadType("snapshot"));
    client.Send(Control("pause"));
    client.ReadType("ack", &seen);
    for (const json& s : seen) {
      if (s["type"] == "snapshot") EXPECT_EQ(s["seq"], expected++);
    }
  }
  // Nothing ticks while paused.
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  client.Send(Control("start"));
  std::vector<json> seen;
  client.ReadType("ack", &seen);
  EXPECT_TRUE(seen.empty());
  EXPECT_EQ(client.ReadType("snapshot")["seq"], expected);
}

TEST(LiveServerTest, SetSpeedChangesTickPeriod) {
  RunningServer server;
  WsTestClient client(server.port(), "/session/speed");
  client.Read();
  client.Send(SetSpeed(250));
  client.ReadType("ack");
  client.Send(Control("start"));
  client.ReadType("ack");
  const json first = client.ReadType("snapshot");
  EXPECT_EQ(first["tick_ms"], 250);
  const auto t0 = Clock::now();
  for (int i = 0; i < 8; ++i) client.ReadType("snapshot");
  const double mean_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / 8.0;
  EXPECT_NEAR(mean_ms, 250.0, 50.0);
}

TEST(LiveServerTest, SingleSessionModeRefusesOtherIds) {
  RunningServer server;
  WsTestClient first(server.port(), "/session/one");
  first.Read();
  WsTestClient second(server.port(), "/session/two");
  const json reply = second.Read();
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["code"], "session_limit");
  EXPECT_TRUE(second.ReadError());
  // The same id can still join.
  WsTestClient third(server.port(), "/session/one");
  EXPECT_EQ(third.Read()["session"], "one");
}

TEST(LiveServerTest, MultiSessionModeKeepsSessionsIndependent) {
  ServerOptions options;
  options.multi_session = true;
  RunningServer server(options);
  WsTestClient a(server.port(), "/session/a");
  WsTestClient b(server.port(), "/session/b");
  a.Read();
  b.Read();
  a.Send(SetSpeed(20));
  a.ReadType("ack");
  a.Send(Control("start"));
  a.ReadType("ack");
  for (int i = 0; i < 5; ++i) a.ReadType("snapshot");
  b.Send({{"type", "feedback"}, {"polarity", 1}});
  const json ack = b.Read();
  EXPECT_EQ(ack["type"], "ack");
  EXPECT_EQ(ack["feedback_id"], 0);
  EXPECT_EQ(ack["episode"], 0);
  EXPECT_EQ(ack["step"], 0);
  EXPECT_EQ(json::parse(HttpGet(server.port(), "/healthz").body())["sessions"], 2);
}

TEST(LiveServerTest, StopReturnsWithClientsConnected) {
  auto server = std::make_unique<RunningServer>();
  WsTestClient client(server->port(), "/session/z");
  client.Read();
  const auto t0 = Clock::now();
  server.reset();
  EXPECT_LT(Clock::now() - t0, std::chrono::seconds(2));
  EXPECT_TRUE(client.ReadError());
}

}  // namespace
}  // namespace hitl
