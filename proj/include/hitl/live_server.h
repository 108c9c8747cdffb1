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

// HTTP + WebSocket front end for live sessions.
//
//   GET /healthz          JSON liveness probe
//   GET /session/{id}     WebSocket upgrade; snapshots out, feedback/control in
//   GET /<path>           static files from ServerOptions::static_dir
//
// Everything runs on one I/O thread: Run() blocks until Stop().

#ifndef HITL_LIVE_SERVER_H_
#define HITL_LIVE_SERVER_H_

#include <cstdint>
#include <memory>
#include <string>

#include "hitl/live_session.h"

namespace hitl {

struct ServerOptions {
  uint16_t port = 8080;  // 0 picks a free port
  std::string address = "127.0.0.1";
  std::string static_dir;  // empty: no static files
  SessionConfig session;
  // Without it the first session id claims the server and other ids are
  // refused.
  bool multi_session = false;
};

class LiveServer {
 public:
  // Binds immediately; throws on failure.
  explicit LiveServer(ServerOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  uint16_t port() const;
  void Run();
  // Safe from any thread.
  void Stop();

  class Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace hitl

#endif  // HITL_LIVE_SERVER_H_
