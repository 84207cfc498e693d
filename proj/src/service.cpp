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

#include "ctxguard/service.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>
#include <fstream>

namespace ctxguard {

// ---------------------------------------------------------------------------
// ServiceConfig
// ---------------------------------------------------------------------------

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j) {
  ServiceConfig c;
  if (!j.is_object()) return c;
  c.socket_path = j.value("socket_path", c.socket_path);
  c.cache_capacity = j.value("cache_capacity", c.cache_capacity);
  if (auto it = j.find("pinned_apps"); it != j.end() && it->is_array())
    for (const auto& a : *it)
      if (a.is_string()) c.pinned_apps.push_back(a.get<std::string>());
  c.intent_threshold = j.value("intent_threshold", c.intent_threshold);
  c.unknown_context = j.value("unknown_context", c.unknown_context);
  c.order_check = j.value("order_check", c.order_check);
  c.event_log = j.value("event_log", c.event_log);
  c.extractor = j.value("extractor", c.extractor);
  c.embedder = j.value("embedder", c.embedder);
  c.extraction_timeout_ms = j.value("extraction_timeout_ms", c.extraction_timeout_ms);
  c.stall_ms = j.value("stall_ms", c.stall_ms);
  c.acquisition_fixture = j.value("acquisition_fixture", c.acquisition_fixture);
  c.acquisition_cli = j.value("acquisition_cli", c.acquisition_cli);
  return c;
}

ServiceConfig ServiceConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error("config file is malformed JSON: " + path);
  return from_json(doc);
}

RuntimeConfig ServiceConfig::runtime_config() const {
  RuntimeConfig rc;
  rc.cache_capacity = cache_capacity;
  rc.pinned_apps = {pinned_apps.begin(), pinned_apps.end()};
  rc.intent_threshold = intent_threshold;
  rc.unknown_routing =
      unknown_context == "confirm" ? UnknownRouting::confirm : UnknownRouting::block;
  rc.order_check = order_check == "blocking"  ? OrderCheckMode::blocking
                   : order_check == "off"     ? OrderCheckMode::off
                                              : OrderCheckMode::advisory;
  rc.extraction_timeout = std::chrono::milliseconds(extraction_timeout_ms);
  rc.event_log_path = event_log;
  return rc;
}

AcquisitionProviders ServiceConfig::make_providers() const {
  AcquisitionProviders providers;
  if (!acquisition_fixture.empty()) providers = fixture_acquisition_from_file(acquisition_fixture);
  if (acquisition_cli) providers.set(Source::system_cli, cli_resolver());
  return providers;
}

std::shared_ptr<IntentExtractor> ServiceConfig::make_extractor() const {
  if (extractor == "stub") return std::make_shared<KeywordExtractor>();
  if (extractor == "stub_stall") return std::make_shared<StallingExtractor>(stall_ms);
  return std::shared_ptr<IntentExtractor>(make_http_extractor(extractor));
}

std::shared_ptr<Embedder> ServiceConfig::make_embedder() const {
  if (embedder == "stub") return std::make_shared<HashedBagEmbedder>();
  return std::shared_ptr<Embedder>(make_http_embedder(embedder));
}

// ---------------------------------------------------------------------------
// GuardService
// ---------------------------------------------------------------------------

GuardService::GuardService(ServiceConfig config) : config_(std::move(config)) {
  runtime_ = std::make_unique<GuardRuntime>(config_.runtime_config(), config_.make_providers(),
                                            config_.make_extractor(), config_.make_embedder());
}

GuardService::~GuardService() { stop(); }

void GuardService::start() {
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  ::unlink(config_.socket_path.c_str());
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (config_.socket_path.size() >= sizeof(addr.sun_path))
    throw std::runtime_error("socket path too long: " + config_.socket_path);
  std::strncpy(addr.sun_path, config_.socket_path.c_str(), sizeof(addr.sun_path) - 1);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("bind(" + config_.socket_path + ") failed");
  }
  if (::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("listen() failed");
  }
  stopping_ = false;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void GuardService::wait() {
  std::unique_lock lock(shutdown_mtx_);
  shutdown_cv_.wait(lock, [this] { return shutdown_requested_; });
  lock.unlock();
  stop();
}

void GuardService::stop() {
  bool was_stopping = stopping_.exchange(true);
  {
    std::lock_guard lock(shutdown_mtx_);
    shutdown_requested_ = true;
  }
  shutdown_cv_.notify_all();
  if (was_stopping && !accept_thread_.joinable()) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    ::unlink(config_.socket_path.c_str());
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mtx_);
    workers.swap(workers_);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
}

void GuardService::accept_loop() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, 100);
    if (rc <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::string session_id = "s" + std::to_string(next_session_.fetch_add(1));
    std::lock_guard lock(workers_mtx_);
    workers_.emplace_back([this, fd, session_id] { handle_connection(fd, session_id); });
  }
}

void GuardService::handle_connection(int fd, const std::string& session_id) {
  Session& session = runtime_->open_session(session_id);
  std::string buffer;
  char chunk[4096];
  for (;;) {
    auto newline = buffer.find('\n');
    if (newline == std::string::npos) {
      pollfd pfd{fd, POLLIN, 0};
      int rc = ::poll(&pfd, 1, 100);
      if (rc < 0) break;
      if (rc == 0) {
        if (stopping_) break;
        continue;
      }
      ssize_t n = ::read(fd, chunk, sizeof(chunk));
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    std::string line = buffer.substr(0, newline);
    buffer.erase(0, newline + 1);
    if (line.empty()) continue;
    std::string response = process_frame(session, line);
    response.push_back('\n');
    const char* data = response.data();
    std::size_t remaining = response.size();
    while (remaining > 0) {
      ssize_t n = ::write(fd, data, remaining);
      if (n <= 0) break;
      data += n;
      remaining -= static_cast<std::size_t>(n);
    }
    if (stopping_) break;
  }
  ::close(fd);
  runtime_->close_session(session_id);
}

namespace {

nlohmann::json error_frame(std::uint64_t id, const std::string& code, const std::string& msg) {
  return {{"id", id}, {"type", "error"}, {"code", code}, {"msg", msg}};
}

}  // namespace

std::string GuardService::process_frame(Session& session, const std::string& line) {
  nlohmann::json frame = nlohmann::json::parse(line, nullptr, false);
  if (frame.is_discarded() || !frame.is_object())
    return error_frame(0, "bad_frame", "frames must be JSON objects").dump();
  std::uint64_t id = 0;
  if (frame.contains("id") && frame["id"].is_number_unsigned()) id = frame["id"].get<std::uint64_t>();
  if (!frame.contains("type") || !frame["type"].is_string())
    return error_frame(id, "bad_frame", "missing frame type").dump();
  std::string type = frame["type"].get<std::string>();

  try {
    if (type == "hello") {
      return nlohmann::json{{"id", id}, {"type", "hello_resp"}, {"protocol", "1"}}.dump();
    }
    if (type == "register_app") {
      std::string document;
      if (frame.contains("space") && frame["space"].is_object()) {
        document = frame["space"].dump();
      } else if (frame.contains("space_path") && frame["space_path"].is_string()) {
        std::ifstream in(frame["space_path"].get<std::string>());
        if (!in) return error_frame(id, "bad_space", "cannot open space file").dump();
        document.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      } else {
        return error_frame(id, "bad_frame", "register_app needs 'space' or 'space_path'").dump();
      }
      ContextSpace space;
      try {
        space = parse_space(document);
      } catch (const SchemaError& e) {
        return error_frame(id, "bad_space", e.what()).dump();
      }
      std::string app_id = space.app_id;
      try {
        runtime_->register_app(session, std::move(space));
      } catch (const ContextManagerError& e) {
        return error_frame(id, "lint_failed", e.what()).dump();
      }
      return nlohmann::json{{"id", id}, {"type", "register_app_resp"}, {"app", app_id}}.dump();
    }
    if (type == "instruction") {
      if (!frame.contains("text") || !frame["text"].is_string())
        return error_frame(id, "bad_frame", "instruction needs 'text'").dump();
      runtime_->instruction(session, frame["text"].get<std::string>());
      return nlohmann::json{{"id", id}, {"type", "instruction_resp"}}.dump();
    }
    if (type == "pre_action") {
      ActionPayload action;
      try {
        action = ActionPayload::from_json(frame);
      } catch (const std::invalid_argument& e) {
        return error_frame(id, "bad_frame", e.what()).dump();
      }
      Decision d = runtime_->pre_action(session, action);
      nlohmann::json resp = d.to_frame_fields();
      resp["id"] = id;
      resp["type"] = "pre_action_resp";
      return resp.dump();
    }
    if (type == "post_action") {
      if (!frame.contains("function") || !frame["function"].is_string())
        return error_frame(id, "bad_frame", "post_action needs 'function'").dump();
      nlohmann::json params =
          frame.contains("params") && frame["params"].is_object() ? frame["params"]
                                                                  : nlohmann::json::object();
      runtime_->post_action(session, frame["function"].get<std::string>(), params,
                            frame.value("outcome", "ok"));
      return nlohmann::json{{"id", id}, {"type", "post_action_resp"}}.dump();
    }
    if (type == "confirm_response") {
      if (!frame.contains("event_id") || !frame["event_id"].is_number_unsigned())
        return error_frame(id, "bad_frame", "confirm_response needs 'event_id'").dump();
      bool allow = frame.value("allow", false);
      Decision d = runtime_->confirm(session, frame["event_id"].get<std::uint64_t>(), allow);
      return nlohmann::json{{"id", id},
                            {"type", "confirm_response_resp"},
                            {"verdict", to_string(d.verdict)}}
          .dump();
    }
    if (type == "report") {
      if (!frame.contains("event_id") || !frame["event_id"].is_number_unsigned())
        return error_frame(id, "bad_frame", "report needs 'event_id'").dump();
      runtime_->report(session, frame["event_id"].get<std::uint64_t>(), frame.value("note", ""));
      return nlohmann::json{{"id", id}, {"type", "report_resp"}}.dump();
    }
    if (type == "shutdown") {
      {
        std::lock_guard lock(shutdown_mtx_);
        shutdown_requested_ = true;
      }
      shutdown_cv_.notify_all();
      stopping_ = true;
      return nlohmann::json{{"id", id}, {"type", "shutdown_resp"}}.dump();
    }
    return error_frame(id, "unknown_type", "no handler for frame type '" + type + "'").dump();
  } catch (const RuntimeError& e) {
    return error_frame(id, e.code(), e.what()).dump();
  } catch (const std::exception& e) {
    return error_frame(id, "internal", e.what()).dump();
  }
}

// ---------------------------------------------------------------------------
// LineClient
// ---------------------------------------------------------------------------

LineClient::LineClient(const std::string& socket_path) {
  fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error("socket() failed");
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, socket_path.c_str(), sizeof(addr.sun_path) - 1);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("connect(" + socket_path + ") failed");
  }
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(const std::string& line) {
  std::string out = line;
  out.push_back('\n');
  const char* data = out.data();
  std::size_t remaining = out.size();
  while (remaining > 0) {
    ssize_t n = ::write(fd_, data, remaining);
    if (n <= 0) throw std::runtime_error("write to service failed");
    data += n;
    remaining -= static_cast<std::size_t>(n);
  }
}

std::string LineClient::read_line() {
  for (;;) {
    auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = ::read(fd_, chunk, sizeof(chunk));
    if (n <= 0) throw std::runtime_error("service closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

nlohmann::json LineClient::request(const nlohmann::json& frame) {
  send_line(frame.dump());
  nlohmann::json resp = nlohmann::json::parse(read_line(), nullptr, false);
  if (resp.is_discarded()) throw std::runtime_error("service sent malformed JSON");
  return resp;
}

}  // namespace ctxguard
