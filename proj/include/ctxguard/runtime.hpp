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

#include <chrono>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ctxguard/acquisition.hpp"
#include "ctxguard/gui.hpp"
#include "ctxguard/intent.hpp"
#include "ctxguard/session.hpp"
#include "ctxguard/verifier.hpp"

namespace ctxguard {

enum class OrderCheckMode { off, advisory, blocking };

struct RuntimeConfig {
  std::size_t cache_capacity = 8;
  std::set<std::string> pinned_apps;
  double intent_threshold = 0.35;
  UnknownRouting unknown_routing = UnknownRouting::block;
  OrderCheckMode order_check = OrderCheckMode::advisory;
  std::chrono::milliseconds extraction_timeout{1000};
  std::string event_log_path;
};

/// One agent action awaiting validation: either a direct function call or a
/// coordinate-based GUI interaction with the on-screen tree it targets.
struct ActionPayload {
  enum class Mode { direct, gui };
  Mode mode = Mode::direct;
  std::string function_id;              // direct
  nlohmann::json params = nlohmann::json::object();
  GuiAction gui;                        // gui
  std::string tree_xml;

  static ActionPayload from_json(const nlohmann::json& j);  // throws std::invalid_argument
  nlohmann::json to_json() const;
};

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// The enforcement engine shared by the socket service and the in-process
/// replay harness. Sessions are confined to one caller thread each; the
/// extraction future is the only cross-thread handoff inside a session.
class GuardRuntime {
 public:
  GuardRuntime(RuntimeConfig config, AcquisitionProviders providers,
               std::shared_ptr<IntentExtractor> extractor, std::shared_ptr<Embedder> embedder);

  Session& open_session(const std::string& session_id);
  void close_session(const std::string& session_id);

  /// Lints, caches, and activates the space for this session.
  void register_app(Session& session, ContextSpace space);
  bool switch_app(Session& session, const std::string& app_id);

  /// Acknowledges the instruction and kicks off intent extraction
  /// concurrently; validation later awaits the extraction barrier.
  void instruction(Session& session, const std::string& text);

  /// The decide pipeline: await extraction, map GUI actions, bind parameter
  /// contexts, refresh hot values, refine the intent, order-check, retrieve
  /// and validate. Appends exactly one validation event.
  Decision pre_action(Session& session, const ActionPayload& action);

  void post_action(Session& session, const std::string& function_id,
                   const nlohmann::json& params, const std::string& outcome);

  /// User resolution of a confirm (or override of a block). Allowing a
  /// blocked action flags the event as an override for policy evolution.
  Decision confirm(Session& session, std::uint64_t event_id, bool user_allowed);

  /// User-filed anomaly report against a previously decided event.
  void report(Session& session, std::uint64_t event_id, const std::string& note);

  ContextManager& manager() { return manager_; }
  EventStore& events() { return events_; }
  const RuntimeConfig& config() const { return config_; }

 private:
  bool await_extraction(Session& session);

  RuntimeConfig config_;
  ContextManager manager_;
  std::shared_ptr<IntentExtractor> extractor_;
  std::shared_ptr<Embedder> embedder_;
  EventStore events_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::mutex sessions_mtx_;
};

}  // namespace ctxguard
