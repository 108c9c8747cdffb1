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

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace hitl {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

constexpr std::string_view kSessionPrefix = "/session/";
constexpr size_t kMaxMessageBytes = 64 * 1024;
constexpr size_t kMaxSessionIdLength = 64;

bool ValidSessionId(std::string_view id) {
  if (id.empty() || id.size() > kMaxSessionIdLength) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  }
  return true;
}

std::string MimeType(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".txt") return "text/plain";
  return "application/octet-stream";
}

std::string ErrorText(const std::string& code, const std::string& message) {
  return nlohmann::json{{"type", "error"}, {"code", code}, {"message", message}}.dump();
}

}  // namespace

class Connection {
 public:
  virtual ~Connection() = default;
  virtual void Close() = 0;
};

class WsClient;

struct SessionSlot {
  SessionSlot(net::io_context& ioc, std::string id, const SessionConfig& cfg)
      : session(std::move(id), cfg), timer(ioc) {}
  Session session;
  net::steady_timer timer;
  Clock::time_point next_tick;
  std::vector<std::weak_ptr<WsClient>> clients;
};

class LiveServer::Impl {
 public:
  explicit Impl(ServerOptions options);
  ~Impl();

  void Accept();
  void Shutdown();
  // Returns nullptr when the id is refused.
  std::shared_ptr<SessionSlot> FindOrCreate(const std::string& id);
  void ArmTimer(const std::shared_ptr<SessionSlot>& slot, bool restart);
  void Broadcast(SessionSlot& slot, const std::string& text);
  void Track(std::weak_ptr<Connection> connection);

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  uint16_t port = 0;
  ServerOptions options;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions;
  std::vector<std::weak_ptr<Connection>> connections;
  bool stopped = false;
};

class WsClient : public Connection, public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket&& socket, LiveServer::Impl* server)
      : ws_(std::move(socket)), server_(server) {}

  void Start(http::request<http::string_body> req, std::string session_id) {
    session_id_ = std::move(session_id);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxMessageBytes);
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      self->OnAccept(ec);
    });
  }

  void Send(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) DoWrite();
  }

  void Close() override {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void OnAccept(beast::error_code ec) {
    if (ec || server_->stopped) return;
    server_->Track(weak_from_this());
    slot_ = server_->FindOrCreate(session_id_);
    if (!slot_) {
      close_after_write_ = true;
      Send(ErrorText("session_limit", "server is bound to another session"));
      return;
    }
    slot_->clients.push_back(weak_from_this());
    Send(slot_->session.LatestSnapshot().dump());
    DoRead();
  }

  void DoRead() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, size_t) {
      self->OnRead(ec);
    });
  }

  void OnRead(beast::error_code ec) {
    if (ec || server_->stopped) return;
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    const nlohmann::json reply = slot_->session.HandleMessage(text);
    Send(reply.dump());
    if (reply["type"] == "ack" && reply["for"] == "control") {
      const std::string command = reply["command"];
      if (command == "start" || command == "set_speed") server_->ArmTimer(slot_, true);
    }
    DoRead();
  }

  void DoWrite() {
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) {
                      self->OnWrite(ec);
                    });
  }

  void OnWrite(beast::error_code ec) {
    if (ec) {
      outbox_.clear();
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) {
      DoWrite();
    } else if (close_after_write_) {
      ws_.async_close(websocket::close_code::policy_error,
                      [self = shared_from_this()](beast::error_code) {});
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  LiveServer::Impl* server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::string session_id_;
  std::shared_ptr<SessionSlot> slot_;
  bool close_after_write_ = false;
  bool closed_ = false;
};

class HttpConnection : public Connection,
                       public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, LiveServer::Impl* server)
      : stream_(std::move(socket)), server_(server) {}

  void Start() {
    server_->Track(weak_from_this());
    DoRead();
  }

  void Close() override {
    beast::error_code ignored;
    stream_.socket().close(ignored);
  }

 private:
  void DoRead() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, size_t) {
                       self->OnRead(ec);
                     });
  }

  void OnRead(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec || server_->stopped) return;
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_) && target.rfind(kSessionPrefix, 0) == 0 &&
        ValidSessionId(std::string_view(target).substr(kSessionPrefix.size()))) {
      stream_.expires_never();
      auto client = std::make_shared<WsClient>(stream_.release_socket(), server_);
      client->Start(std::move(req_), target.substr(kSessionPrefix.size()));
      return;
    }
    HandleRequest();
  }

  template <class Body>
  void Respond(http::response<Body>&& response) {
    auto res = std::make_shared<http::response<Body>>(std::move(response));
    res->keep_alive(req_.keep_alive());
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, size_t) {
                        if (ec) return;
                        if (res->keep_alive()) {
                          self->DoRead();
                        } else {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                        }
                      });
  }

  void RespondText(http::status status, std::string_view type, std::string body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, std::string(type));
    res.body() = std::move(body);
    res.prepare_payload();
    Respond(std::move(res));
  }

  void HandleRequest() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      RespondText(http::status::method_not_allowed, "text/plain", "method not allowed\n");
      return;
    }
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (target == "/healthz") {
      const nlohmann::json body{{"status", "ok"}, {"sessions", server_->sessions.size()}};
      RespondText(http::status::ok, "application/json", body.dump());
      return;
    }
    if (target.rfind(kSessionPrefix, 0) == 0) {
      RespondText(http::status::upgrade_required, "text/plain",
                  "session endpoints require a WebSocket upgrade\n");
      return;
    }
    const std::string& root = server_->options.static_dir;
    if (root.empty() || target.empty() || target[0] != '/' ||
        target.find("..") != std::string::npos) {
      RespondText(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = std::filesystem::path(root) / target.substr(1);
    beast::error_code ec;
    http::file_body::value_type file;
    if (std::filesystem::is_regular_file(path)) {
      file.open(path.c_str(), beast::file_mode::scan, ec);
    } else {
      ec = http::error::end_of_stream;
    }
    if (ec) {
      RespondText(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    const auto size = file.size();
    if (req_.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, req_.version()};
      res.set(http::field::content_type, MimeType(path));
      res.content_length(size);
      Respond(std::move(res));
      return;
    }
    http::response<http::file_body> res{std::piecewise_construct,
                                        std::make_tuple(std::move(file)),
                                        std::make_tuple(http::status::ok, req_.version())};
    res.set(http::field::content_type, MimeType(path));
    res.content_length(size);
    Respond(std::move(res));
  }

  beast::tcp_stream stream_;
  LiveServer::Impl* server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

LiveServer::Impl::Impl(ServerOptions opts) : options(std::move(opts)) {
  // Surface config errors at startup rather than on first connect.
  Session probe("probe", options.session);
  const tcp::endpoint endpoint(net::ip::make_address(options.address), options.port);
  acceptor.open(endpoint.protocol());
  acceptor.set_option(net::socket_base::reuse_address(true));
  acceptor.bind(endpoint);
  acceptor.listen(net::socket_base::max_listen_connections);
  port = acceptor.local_endpoint().port();
  Accept();
}

LiveServer::Impl::~Impl() {
  if (!stopped) Shutdown();
  // Let aborted handlers run so every connection and timer is released.
  ioc.restart();
  ioc.run();
}

void LiveServer::Impl::Accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (stopped) return;
    if (!ec) std::make_shared<HttpConnection>(std::move(socket), this)->Start();
    Accept();
  });
}

void LiveServer::Impl::Shutdown() {
  stopped = true;
  beast::error_code ignored;
  acceptor.close(ignored);
  for (auto& [id, slot] : sessions) slot->timer.cancel();
  for (auto& weak : connections) {
    if (auto connection = weak.lock()) connection->Close();
  }
  connections.clear();
}

void LiveServer::Impl::Track(std::weak_ptr<Connection> connection) {
  std::erase_if(connections, [](const std::weak_ptr<Connection>& w) { return w.expired(); });
  connections.push_back(std::move(connection));
}

std::shared_ptr<SessionSlot> LiveServer::Impl::FindOrCreate(const std::string& id) {
  if (auto it = sessions.find(id); it != sessions.end()) return it->second;
  if (!options.multi_session && !sessions.empty()) return nullptr;
  auto slot = std::make_shared<SessionSlot>(ioc, id, options.session);
  sessions.emplace(id, slot);
  ArmTimer(slot, true);
  return slot;
}

void LiveServer::Impl::ArmTimer(const std::shared_ptr<SessionSlot>& slot, bool restart) {
  const auto period = std::chrono::milliseconds(slot->session.tick_ms());
  const auto now = Clock::now();
  if (restart) slot->next_tick = now;
  slot->next_tick += period;
  if (slot->next_tick < now) slot->next_tick = now;
  // Re-arming cancels any wait already pending on the timer.
  slot->timer.expires_at(slot->next_tick);
  slot->timer.async_wait([this, slot](beast::error_code ec) {
    if (ec || stopped) return;
    if (auto snapshot = slot->session.Tick()) Broadcast(*slot, snapshot->dump());
    ArmTimer(slot, false);
  });
}

void LiveServer::Impl::Broadcast(SessionSlot& slot, const std::string& text) {
  std::erase_if(slot.clients, [](const std::weak_ptr<WsClient>& w) { return w.expired(); });
  for (auto& weak : slot.clients) {
    if (auto client = weak.lock()) client->Send(text);
  }
}

LiveServer::LiveServer(ServerOptions options)
    : impl_(std::make_shared<Impl>(std::move(options))) {}

LiveServer::~LiveServer() = default;

uint16_t LiveServer::port() const { return impl_->port; }

void LiveServer::Run() { impl_->ioc.run(); }

void LiveServer::Stop() {
  net::post(impl_->ioc, [impl = impl_.get()] {
    if (!impl->stopped) impl->Shutdown();
  });
}

}  // namespace hitl
