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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxguard/value.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Context-space data model
//
// A context space is the per-application policy database: a set of function
// entries (optionally grouped into classes), each carrying a security level,
// predicted user intents, and per-intent policies, plus a metadata table for
// every context the policies reference.
// ---------------------------------------------------------------------------

enum class SecurityLevel { normal, conditional, dangerous };

/// Where a context value is acquired at runtime.
enum class Source { user_request, system_api, system_cli, func_params, agent_history };

/// Update-frequency class. Cold values are refreshed on space activation,
/// warm ones per user instruction, hot ones before every validation.
enum class Temperature { cold, warm, hot };

std::string to_string(SecurityLevel v);
std::string to_string(Source v);
std::string to_string(Temperature v);
std::optional<SecurityLevel> security_level_from_string(std::string_view s);
std::optional<Source> source_from_string(std::string_view s);
std::optional<Temperature> temperature_from_string(std::string_view s);

struct ContextMetadata {
  std::string ctx_id;
  ValueType type = ValueType::string;
  Source src = Source::user_request;
  Temperature tempr = Temperature::warm;
  /// Free-form descriptor consumed by acquisition providers (a lookup key or
  /// a shell command, depending on src). Empty means "use ctx_id".
  std::string acquisition;
};

struct Rule {
  std::string ctx_id;
  std::string constraint;
  std::string guidance;
};

/// A policy is the conjunction of its rules: every rule must hold for the
/// guarded function to run under the owning intent.
struct Policy {
  std::vector<Rule> rules;
};

struct IntentEntry {
  std::string intent_id;
  std::string description;
  bool is_fallback = false;
  /// Contexts whose values are extracted from the user instruction.
  std::vector<std::string> param_contexts;
};

/// Links a GUI element to a function entry. package and widget_class may be
/// empty (wildcard); resource_id never is.
struct GuiBinding {
  std::string package;
  std::string widget_class;
  std::string resource_id;

  bool operator==(const GuiBinding&) const = default;
};

struct FunctionEntry {
  std::string function_id;
  std::string desc;
  SecurityLevel sec_level = SecurityLevel::normal;
  std::vector<IntentEntry> intents;
  std::map<std::string, Policy> policies;  // intent_id -> policy
  std::optional<GuiBinding> gui_binding;

  const IntentEntry* find_intent(std::string_view intent_id) const;
  const IntentEntry* fallback_intent() const;
};

struct ClassEntry {
  std::string class_id;
  std::vector<FunctionEntry> functions;
};

struct ContextSpace {
  std::string app_id;
  std::string version;
  /// Exactly one of classes/functions is engaged.
  std::optional<std::vector<ClassEntry>> classes;
  std::optional<std::vector<FunctionEntry>> functions;
  std::map<std::string, ContextMetadata> contexts;

  std::vector<const FunctionEntry*> all_functions() const;
  const ContextMetadata* find_context(std::string_view ctx_id) const;
};

// ---------------------------------------------------------------------------
// Context vector: runtime values for every declared context.
// ---------------------------------------------------------------------------

struct ContextEntry {
  std::string ctx_id;
  std::optional<Value> value;  // nullopt = unset
  ContextMetadata metadata;
  /// Number of refresh touches (not value writes).
  std::uint64_t update_count = 0;
  std::string last_trigger;
};

class ContextVector {
 public:
  ContextVector() = default;
  explicit ContextVector(const ContextSpace& space);

  enum class SetStatus { ok, unknown_context, type_mismatch };

  bool has(std::string_view ctx_id) const;
  const ContextEntry* find(std::string_view ctx_id) const;
  ContextEntry* find(std::string_view ctx_id);
  std::optional<Value> get(std::string_view ctx_id) const;
  SetStatus set(const std::string& ctx_id, Value v);
  SetStatus set_from_json(const std::string& ctx_id, const nlohmann::json& j);
  void unset(const std::string& ctx_id);
  std::size_t size() const { return entries_.size(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, ContextEntry> entries_;
};

ContextVector init_vector(const ContextSpace& space);

// ---------------------------------------------------------------------------
// Parsing, canonical serialization, lint, lookup
// ---------------------------------------------------------------------------

/// Raised when a space document violates the schema; `path` names the first
/// offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses and fully validates a context-space document.
ContextSpace parse_space(std::string_view document);

/// Canonical form: sorted object keys, stable list order, 2-space indent,
/// trailing newline. parse(serialize(s)) == s, and serialize is idempotent
/// over parse.
std::string serialize_space(const ContextSpace& space);

enum class Severity { error, warning };

struct Finding {
  Severity severity;
  std::string code;
  std::string path;
  std::string message;
};

/// Structural diagnostics over an in-memory space. Total: never throws.
std::vector<Finding> lint_space(const ContextSpace& space) noexcept;

bool lint_clean(const std::vector<Finding>& findings);

/// Lookup by id, class-qualified id, or GUI attributes. nullptr = miss.
const FunctionEntry* lookup_function(const ContextSpace& space, std::string_view function_id);
const FunctionEntry* lookup_function(const ContextSpace& space, std::string_view class_id,
                                     std::string_view function_id);
/// Binding match precedence: class-specific bindings beat class-wildcard
/// ones; empty binding fields match anything except resource_id.
const FunctionEntry* lookup_function_by_gui(const ContextSpace& space, std::string_view package,
                                            std::string_view widget_class,
                                            std::string_view resource_id);

}  // namespace ctxguard
