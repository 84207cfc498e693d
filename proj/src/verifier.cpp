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

#include "ctxguard/verifier.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "ctxguard/constraint.hpp"

namespace ctxguard {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::allow: return "allow";
    case Verdict::block: return "block";
    case Verdict::confirm: return "confirm";
    case Verdict::miss: return "miss";
  }
  return "?";
}

const char* to_string(MissKind k) {
  switch (k) {
    case MissKind::unknown_function: return "unknown_function";
    case MissKind::unknown_intent: return "unknown_intent";
    case MissKind::unrelated_instruction: return "unrelated_instruction";
  }
  return "?";
}

nlohmann::json Decision::to_frame_fields() const {
  nlohmann::json j;
  j["verdict"] = to_string(verdict);
  j["guidance"] = guidance;
  j["unknowns"] = unknowns;
  if (event_id != 0) j["event_id"] = event_id;
  return j;
}

nlohmann::json ValidationEvent::to_json() const {
  nlohmann::json j;
  j["event_id"] = event_id;
  j["timestamp"] = timestamp;
  j["session_id"] = session_id;
  j["app_id"] = app_id;
  j["function_id"] = function_id;
  if (intent_id) j["intent_id"] = *intent_id;
  j["verdict"] = verdict;
  if (miss_kind) j["miss_kind"] = *miss_kind;
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& r : rule_outcomes)
    outcomes.push_back(
        {{"ctx_id", r.ctx_id}, {"constraint", r.constraint}, {"outcome", to_string(r.outcome)}});
  j["rule_outcomes"] = std::move(outcomes);
  j["instruction"] = instruction;
  nlohmann::json ctxs = nlohmann::json::object();
  for (const auto& [id, v] : referenced_contexts) ctxs[id] = v;
  j["referenced_contexts"] = std::move(ctxs);
  if (user_override) j["user_override"] = *user_override;
  if (user_reported) {
    j["user_reported"] = true;
    j["report_note"] = report_note;
  }
  return j;
}

ValidationEvent ValidationEvent::from_json(const nlohmann::json& j) {
  ValidationEvent e;
  e.event_id = j.value("event_id", 0ull);
  e.timestamp = j.value("timestamp", "");
  e.session_id = j.value("session_id", "");
  e.app_id = j.value("app_id", "");
  e.function_id = j.value("function_id", "");
  if (j.contains("intent_id")) e.intent_id = j["intent_id"].get<std::string>();
  e.verdict = j.value("verdict", "");
  if (j.contains("miss_kind")) e.miss_kind = j["miss_kind"].get<std::string>();
  if (auto it = j.find("rule_outcomes"); it != j.end() && it->is_array()) {
    for (const auto& r : *it) {
      RuleOutcome o;
      o.ctx_id = r.value("ctx_id", "");
      o.constraint = r.value("constraint", "");
      std::string s = r.value("outcome", "unknown");
      o.outcome = s == "true" ? TriBool::yes : s == "false" ? TriBool::no : TriBool::unknown;
      e.rule_outcomes.push_back(std::move(o));
    }
  }
  e.instruction = j.value("instruction", "");
  if (auto it = j.find("referenced_contexts"); it != j.end() && it->is_object())
    for (const auto& [id, v] : it->items()) e.referenced_contexts[id] = v;
  if (j.contains("user_override")) e.user_override = j["user_override"].get<bool>();
  e.user_reported = j.value("user_reported", false);
  e.report_note = j.value("report_note", "");
  return e;
}

// ---------------------------------------------------------------------------
// EventStore
// ---------------------------------------------------------------------------

namespace {

std::string now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms.count()));
  return buf;
}

}  // namespace

EventStore::EventStore(const std::string& log_path) {
  if (!log_path.empty()) log_.open(log_path, std::ios::app);
}

std::uint64_t EventStore::append(ValidationEvent event) {
  std::lock_guard lock(mtx_);
  event.event_id = next_id_++;
  if (event.timestamp.empty()) event.timestamp = now_iso8601();
  if (log_.is_open()) {
    log_ << event.to_json().dump() << "\n";
    log_.flush();
  }
  events_.push_back(std::move(event));
  return events_.back().event_id;
}

ValidationEvent* EventStore::find(std::uint64_t event_id) {
  std::lock_guard lock(mtx_);
  for (auto& e : events_)
    if (e.event_id == event_id) return &e;
  return nullptr;
}

void EventStore::persist(const ValidationEvent& event) {
  std::lock_guard lock(mtx_);
  if (log_.is_open()) {
    log_ << event.to_json().dump() << "\n";
    log_.flush();
  }
}

std::vector<ValidationEvent> EventStore::snapshot() const {
  std::lock_guard lock(mtx_);
  return events_;
}

std::vector<ValidationEvent> load_event_log(const std::string& path) {
  std::ifstream in(path);
  std::map<std::uint64_t, std::size_t> by_id;
  std::vector<ValidationEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    ValidationEvent e = ValidationEvent::from_json(j);
    auto it = by_id.find(e.event_id);
    if (it != by_id.end())
      out[it->second] = std::move(e);  // later record supersedes
    else {
      by_id[e.event_id] = out.size();
      out.push_back(std::move(e));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval and validation
// ---------------------------------------------------------------------------

RetrieveResult retrieve(const ContextSpace& space, const std::string& function_id,
                        const RefinedIntent& refined) {
  RetrieveResult r;
  r.entry = lookup_function(space, function_id);
  if (!r.entry) {
    r.miss = MissKind::unknown_function;
    return r;
  }
  if (r.entry->sec_level != SecurityLevel::conditional) return r;  // policy not consulted

  switch (refined.kind) {
    case RefinedIntent::Kind::intent: {
      auto it = r.entry->policies.find(refined.intent_id);
      if (it == r.entry->policies.end())
        r.miss = MissKind::unknown_intent;
      else
        r.policy = &it->second;
      return r;
    }
    case RefinedIntent::Kind::fallback: {
      const IntentEntry* fb = r.entry->fallback_intent();
      if (fb) {
        auto it = r.entry->policies.find(fb->intent_id);
        if (it != r.entry->policies.end()) {
          r.policy = &it->second;
          return r;
        }
      }
      r.miss = MissKind::unknown_intent;
      return r;
    }
    case RefinedIntent::Kind::unrelated:
      r.miss = MissKind::unrelated_instruction;
      return r;
  }
  return r;
}

Decision validate(const FunctionEntry& entry, const Policy* policy, const ContextVector& cv,
                  UnknownRouting unknown_routing, std::vector<RuleOutcome>* outcomes) {
  Decision d;
  switch (entry.sec_level) {
    case SecurityLevel::normal:
      d.verdict = Verdict::allow;
      return d;
    case SecurityLevel::dangerous:
      d.verdict = Verdict::confirm;
      d.reason = "dangerous function requires user confirmation";
      d.guidance.push_back(d.reason);
      return d;
    case SecurityLevel::conditional:
      break;
  }

  if (!policy) {  // callers route misses beforehand; stay closed if they did not
    d.verdict = Verdict::block;
    d.guidance.push_back("no policy available for function '" + entry.function_id + "'");
    return d;
  }

  for (const Rule& rule : policy->rules) {
    TriBool result = TriBool::no;
    try {
      result = evaluate(parse_constraint(rule.constraint), cv);
    } catch (const ConstraintParseError&) {
      result = TriBool::no;  // unparseable rules never pass
    }
    if (outcomes) outcomes->push_back({rule.ctx_id, rule.constraint, result});
    if (result == TriBool::no) {
      d.failed.push_back({rule.ctx_id, rule.constraint, rule.guidance});
    } else if (result == TriBool::unknown) {
      d.unknowns.push_back(rule.ctx_id);
    }
  }

  if (d.failed.empty() && d.unknowns.empty()) {
    d.verdict = Verdict::allow;
    return d;
  }
  for (const auto& f : d.failed) d.guidance.push_back(f.guidance);
  for (const auto& u : d.unknowns) d.guidance.push_back("missing value for context '" + u + "'");
  if (d.failed.empty() && unknown_routing == UnknownRouting::confirm) {
    d.verdict = Verdict::confirm;
    d.reason = "required context values are missing";
  } else {
    d.verdict = Verdict::block;
  }
  return d;
}

}  // namespace ctxguard
