// Copyright 2026 The ctxguard Authors
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

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ctxguard/runtime.hpp"

namespace ctxguard {

/// Service configuration, loadable from JSON. Every field has a default so
/// a minimal config file is `{}`.
struct ServiceConfig {
  std::string socket_path = "/tmp/ctxguard.sock";
  std::size_t cache_capacity = 8;
  std::vector<std::string> pinned_apps;
  double intent_threshold = 0.35;
  std::string unknown_context = "block";  // block | confirm
  std::string order_check = "advisory";   // off | advisory | blocking
  std::string event_log;
  std::string extractor = "stub";  // stub | stub_stall | <url>
  std::string embedder = "stub";   // stub | <url>
  int extraction_timeout_ms = 1000;
  int stall_ms = 80;  // stub_stall only
  std::string acquisition_fixture;  // JSON key-value file for system contexts
  bool acquisition_cli = false;     // run acquisition commands for system_cli

  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig load(const std::string& path);

  RuntimeConfig runtime_config() const;
  AcquisitionProviders make_providers() const;
  std::shared_ptr<IntentExtractor> make_extractor() const;
  std::shared_ptr<Embedder> make_embedder() const;
};

/// The guard daemon: newline-delimited JSON frames over a local stream
/// socket, one session per connection, responses in request order.
class GuardService {
 public:
  explicit GuardService(ServiceConfig config);
  ~GuardService();

  GuardService(const GuardService&) = delete;
  GuardService& operator=(const GuardService&) = delete;

  /// Binds the socket and starts accepting in a background thread.
  void start();
  /// Blocks until a shutdown frame arrives (or stop() is called).
  void wait();
  void stop();

  const std::string& socket_path() const { return config_.socket_path; }
  GuardRuntime& runtime() { return *runtime_; }

 private:
  void accept_loop();
  void handle_connection(int fd, const std::string& session_id);
  std::string process_frame(Session& session, const std::string& line);

  ServiceConfig config_;
  std::unique_ptr<GuardRuntime> runtime_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::vector<std::thread> workers_;
  std::mutex workers_mtx_;
  std::atomic<int> next_session_{1};
  std::mutex shutdown_mtx_;
  std::condition_variable shutdown_cv_;
  bool shutdown_requested_ = false;
};

/// Minimal line-oriented client for the wire protocol (tests, replay).
class LineClient {
 public:
  explicit LineClient(const std::string& socket_path);
  ~LineClient();

  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(const std::string& line);
  std::string read_line();  // strips the trailing newline
  nlohmann::json request(const nlohmann::json& frame);

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace ctxguard
