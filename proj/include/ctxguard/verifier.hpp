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

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ctxguard/intent.hpp"
#include "ctxguard/space.hpp"
#include "ctxguard/value.hpp"

namespace ctxguard {

enum class Verdict { allow, block, confirm, miss };
enum class MissKind { unknown_function, unknown_intent, unrelated_instruction };

const char* to_string(Verdict v);
const char* to_string(MissKind k);

struct FailedRule {
  std::string ctx_id;
  std::string constraint;
  std::string guidance;
};

/// Outcome of the enforcement pipeline. Blocks carry the failed rules and
/// the contexts whose values were missing; guidance aggregates the failed
/// rules' hints in rule order for agent re-planning.
struct Decision {
  Verdict verdict = Verdict::block;
  std::vector<FailedRule> failed;
  std::vector<std::string> unknowns;
  std::vector<std::string> guidance;
  std::string reason;                // confirm
  std::optional<MissKind> miss;
  std::uint64_t event_id = 0;

  bool allowed() const { return verdict == Verdict::allow; }
  nlohmann::json to_frame_fields() const;
};

struct RuleOutcome {
  std::string ctx_id;
  std::string constraint;
  TriBool outcome = TriBool::unknown;
};

struct ValidationEvent {
  std::uint64_t event_id = 0;
  std::string timestamp;
  std::string session_id;
  std::string app_id;
  std::string function_id;
  std::optional<std::string> intent_id;
  std::string verdict;
  std::optional<std::string> miss_kind;
  std::vector<RuleOutcome> rule_outcomes;
  std::string instruction;
  std::map<std::string, nlohmann::json> referenced_contexts;  // unset -> null
  std::optional<bool> user_override;
  bool user_reported = false;
  std::string report_note;

  nlohmann::json to_json() const;
  static ValidationEvent from_json(const nlohmann::json& j);
};

/// Append-only event sink. Every append or in-place update writes one
/// newline-delimited JSON record; consumers collapse duplicates by event_id,
/// keeping the last record.
class EventStore {
 public:
  EventStore() = default;
  explicit EventStore(const std::string& log_path);

  std::uint64_t append(ValidationEvent event);
  ValidationEvent* find(std::uint64_t event_id);
  void persist(const ValidationEvent& event);  // re-log an updated event
  std::vector<ValidationEvent> snapshot() const;

 private:
  mutable std::mutex mtx_;
  std::vector<ValidationEvent> events_;
  std::uint64_t next_id_ = 1;
  std::ofstream log_;
};

/// Loads a newline-delimited event log, collapsing updates by event_id.
std::vector<ValidationEvent> load_event_log(const std::string& path);

/// How a rule that evaluated unknown (missing context value) is routed.
enum class UnknownRouting { block, confirm };

struct RetrieveResult {
  const FunctionEntry* entry = nullptr;
  const Policy* policy = nullptr;
  std::optional<MissKind> miss;
};

/// Policy retrieval via function and intent indexing. A fallback refinement
/// resolves to the fallback policy when one is declared; unrelated
/// instructions and unknown functions surface as misses.
RetrieveResult retrieve(const ContextSpace& space, const std::string& function_id,
                        const RefinedIntent& refined);

/// Core validation: normal functions pass, dangerous ones require
/// confirmation, conditional ones must satisfy every rule of the policy.
/// `outcomes` (optional) receives the per-rule evaluation results.
Decision validate(const FunctionEntry& entry, const Policy* policy, const ContextVector& cv,
                  UnknownRouting unknown_routing, std::vector<RuleOutcome>* outcomes = nullptr);

}  // namespace ctxguard
