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

#include "ctxguard/runtime.hpp"

#include <algorithm>
#include <future>

#include "ctxguard/constraint.hpp"

namespace ctxguard {

ActionPayload ActionPayload::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("action payload must be an object");
  ActionPayload a;
  std::string mode = j.value("mode", "direct");
  if (mode == "direct") {
    a.mode = Mode::direct;
    if (!j.contains("function") || !j["function"].is_string())
      throw std::invalid_argument("direct action needs a 'function' name");
    a.function_id = j["function"].get<std::string>();
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw std::invalid_argument("'params' must be an object");
      a.params = j["params"];
    }
  } else if (mode == "gui") {
    a.mode = Mode::gui;
    if (!j.contains("action")) throw std::invalid_argument("gui action needs an 'action' object");
    a.gui = GuiAction::from_json(j["action"]);
    if (!j.contains("tree") || !j["tree"].is_string())
      throw std::invalid_argument("gui action needs the current 'tree' dump");
    a.tree_xml = j["tree"].get<std::string>();
    if (a.gui.kind == GuiAction::Kind::input) a.params = {{"text", a.gui.text}};
  } else {
    throw std::invalid_argument("unknown action mode '" + mode + "'");
  }
  return a;
}

nlohmann::json ActionPayload::to_json() const {
  nlohmann::json j;
  if (mode == Mode::direct) {
    j["mode"] = "direct";
    j["function"] = function_id;
    j["params"] = params;
  } else {
    j["mode"] = "gui";
    j["action"] = gui.to_json();
    j["tree"] = tree_xml;
  }
  return j;
}

// ---------------------------------------------------------------------------
// GuardRuntime
// ---------------------------------------------------------------------------

GuardRuntime::GuardRuntime(RuntimeConfig config, AcquisitionProviders providers,
                           std::shared_ptr<IntentExtractor> extractor,
                           std::shared_ptr<Embedder> embedder)
    : config_(std::move(config)),
      manager_(config_.cache_capacity, config_.pinned_apps, std::move(providers)),
      extractor_(std::move(extractor)),
      embedder_(std::move(embedder)),
      events_(config_.event_log_path) {}

Session& GuardRuntime::open_session(const std::string& session_id) {
  std::lock_guard lock(sessions_mtx_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    auto session = std::make_unique<Session>();
    session->session_id = session_id;
    it = sessions_.emplace(session_id, std::move(session)).first;
  }
  return *it->second;
}

void GuardRuntime::close_session(const std::string& session_id) {
  std::unique_ptr<Session> doomed;
  {
    std::lock_guard lock(sessions_mtx_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return;
    doomed = std::move(it->second);
    sessions_.erase(it);
  }
  // Drain the pending extraction before the session state goes away.
  if (doomed && doomed->extraction.raw.valid()) doomed->extraction.raw.wait();
}

void GuardRuntime::register_app(Session& session, ContextSpace space) {
  manager_.register_space(session, std::move(space));
}

bool GuardRuntime::switch_app(Session& session, const std::string& app_id) {
  return manager_.switch_app(session, app_id);
}

void GuardRuntime::instruction(Session& session, const std::string& text) {
  if (!session.active_app) throw RuntimeError("no_app", "no application registered");
  manager_.begin_instruction(session, text);
  auto extractor = extractor_;
  auto catalog = session.catalog;  // immutable snapshot for the worker
  session.extraction.raw =
      std::async(std::launch::async, [extractor, catalog, text]() {
        return extractor->extract_raw(text, *catalog);
      }).share();
}

bool GuardRuntime::await_extraction(Session& session) {
  auto& ex = session.extraction;
  if (ex.ingested_generation == ex.generation && ex.latest) return true;
  if (!ex.raw.valid()) return false;
  if (ex.raw.wait_for(config_.extraction_timeout) != std::future_status::ready) return false;

  ExtractionResult result;
  try {
    result = validate_extraction(ex.raw.get(), *session.catalog);
  } catch (const std::exception& e) {
    result.degraded = true;
    result.warnings.push_back(std::string("extraction failed: ") + e.what());
  }
  manager_.ingest_extraction(session, result);
  return true;
}

Decision GuardRuntime::pre_action(Session& session, const ActionPayload& action) {
  if (!session.active_app) throw RuntimeError("no_app", "no application registered");
  if (session.extraction.generation == 0)
    throw RuntimeError("no_instruction", "pre_action before any instruction");

  ValidationEvent event;
  event.session_id = session.session_id;
  event.app_id = *session.active_app;
  event.instruction = session.extraction.instruction;

  auto finish = [&](Decision d) {
    event.verdict = to_string(d.verdict);
    if (d.miss) event.miss_kind = to_string(*d.miss);
    d.event_id = events_.append(std::move(event));
    return d;
  };

  // 1. Extraction barrier: without the instruction's intents we fail closed.
  bool extraction_ready = await_extraction(session);

  // 2. Resolve GUI actions to a function entry.
  std::string function_id;
  nlohmann::json params = action.params;
  if (action.mode == ActionPayload::Mode::gui) {
    GuiTree tree;
    try {
      tree = parse_tree(action.tree_xml);
    } catch (const GuiParseError& e) {
      throw RuntimeError("bad_tree", e.what());
    }
    const GuiNode* node = locate(tree, action.gui.x, action.gui.y);
    const FunctionEntry* entry = node ? map_to_function(*session.space, *node) : nullptr;
    if (!entry) {
      Decision d;
      d.verdict = Verdict::miss;
      d.miss = MissKind::unknown_function;
      d.guidance.push_back(node ? "no function is bound to the targeted element"
                                : "no clickable element at the targeted coordinates");
      event.function_id = node ? node->resource_id : "";
      return finish(std::move(d));
    }
    function_id = entry->function_id;
  } else {
    function_id = action.function_id;
  }
  event.function_id = function_id;

  if (!extraction_ready) {
    Decision d;
    d.verdict = Verdict::block;
    d.guidance.push_back("extraction_timeout");
    return finish(std::move(d));
  }

  // 3. Bind agent-chosen parameters, then refresh hot contexts.
  manager_.apply_func_params(session, params);
  manager_.refresh(session, UpdateTrigger::pre_validation);

  // 4. Refine the intent selection for this function.
  const ExtractionResult* extraction = session.extraction.latest ? &*session.extraction.latest
                                                                 : nullptr;
  std::vector<std::string> raw_intents;
  if (extraction) {
    auto it = extraction->selections.find(function_id);
    if (it != extraction->selections.end()) raw_intents = it->second;
  }
  RefinedIntent refined = refine(function_id, raw_intents, session.extraction.instruction,
                                 *session.catalog, *embedder_, config_.intent_threshold);
  if (refined.kind == RefinedIntent::Kind::intent) event.intent_id = refined.intent_id;

  // 5. Order check against the predicted execution sequence.
  std::string order_note;
  if (config_.order_check != OrderCheckMode::off && extraction &&
      !extraction->predicted_sequence.empty()) {
    auto executed = session.executed_function_ids();
    if (auto violation =
            check_order(extraction->predicted_sequence, executed, function_id)) {
      order_note = "order violation: '" + violation->missing + "' was expected before '" +
                   function_id + "'";
      if (config_.order_check == OrderCheckMode::blocking) {
        Decision d;
        d.verdict = Verdict::block;
        d.guidance.push_back(order_note);
        return finish(std::move(d));
      }
    }
  }

  // 6. Retrieve and validate.
  RetrieveResult retrieved = retrieve(*session.space, function_id, refined);
  if (retrieved.miss) {
    Decision d;
    d.verdict = Verdict::miss;
    d.miss = retrieved.miss;
    d.guidance.push_back(std::string("policy not located (") + to_string(*retrieved.miss) + ")");
    return finish(std::move(d));
  }

  Decision d = validate(*retrieved.entry, retrieved.policy, session.vector,
                        config_.unknown_routing, &event.rule_outcomes);
  if (!order_note.empty()) d.guidance.push_back(order_note);

  // Snapshot the context values the rules actually touched.
  for (const auto& outcome : event.rule_outcomes) {
    auto record = [&](const std::string& ctx_id) {
      auto v = session.vector.get(ctx_id);
      event.referenced_contexts[ctx_id] = v ? value_to_json(*v) : nlohmann::json();
    };
    record(outcome.ctx_id);
    try {
      ConstraintAst ast = parse_constraint(outcome.constraint);
      if (ast.rhs.is_ref()) record(ast.rhs.ref().ctx_id);
    } catch (const ConstraintParseError&) {
    }
  }
  return finish(std::move(d));
}

void GuardRuntime::post_action(Session& session, const std::string& function_id,
                               const nlohmann::json& params, const std::string& outcome) {
  if (!session.active_app) throw RuntimeError("no_app", "no application registered");
  manager_.record_action(session, function_id, params, outcome);
}

Decision GuardRuntime::confirm(Session& session, std::uint64_t event_id, bool user_allowed) {
  ValidationEvent* event = events_.find(event_id);
  if (!event || event->session_id != session.session_id)
    throw RuntimeError("unknown_event", "no such event " + std::to_string(event_id));
  if (event->verdict != "confirm" && event->verdict != "block")
    throw RuntimeError("unknown_event",
                       "event " + std::to_string(event_id) + " is not awaiting confirmation");

  Decision d;
  d.event_id = event_id;
  if (user_allowed) {
    // Allowing past a block is an override signal for policy evolution;
    // confirming a dangerous function is the expected flow.
    event->user_override = event->verdict == "block";
    event->verdict = "allow";
    d.verdict = Verdict::allow;
  } else {
    event->user_override = false;
    event->verdict = "block";
    d.verdict = Verdict::block;
    d.guidance.push_back("user denied the action");
  }
  events_.persist(*event);
  return d;
}

void GuardRuntime::report(Session& session, std::uint64_t event_id, const std::string& note) {
  ValidationEvent* event = events_.find(event_id);
  if (!event || event->session_id != session.session_id)
    throw RuntimeError("unknown_event", "no such event " + std::to_string(event_id));
  event->user_reported = true;
  event->report_note = note;
  events_.persist(*event);
}

}  // namespace ctxguard
