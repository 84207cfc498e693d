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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxguard/space.hpp"
#include "ctxguard/verifier.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Development-phase toolchain: generates context spaces from function
// documentation or GUI handler manifests through a pluggable reasoning
// provider, and evolves them from changelogs and runtime event logs.
// ---------------------------------------------------------------------------

struct ParameterDoc {
  std::string name;
  std::string type;
  std::string description;
};

struct FunctionDoc {
  std::string name;
  std::string description;
  std::vector<ParameterDoc> parameters;

  static FunctionDoc from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<FunctionDoc> load_function_docs(const std::string& path);

struct HandlerEntry {
  GuiBinding binding;
  std::string handler;   // handler method name
  std::string excerpt;   // handler source excerpt
  std::vector<std::string> callees;
};

struct HandlerManifest {
  std::vector<HandlerEntry> entries;

  static HandlerManifest from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

HandlerManifest load_manifest(const std::string& path);

/// Staged reasoning provider: one structured request in, one structured
/// response out. Stages: classify, predict_intents, generate_policy,
/// identify_handlers, suggestion_rationale.
class ReasoningProvider {
 public:
  virtual ~ReasoningProvider() = default;
  virtual nlohmann::json reason(const std::string& stage, const nlohmann::json& input) = 0;
};

/// Offline deterministic provider. Canned responses are keyed
/// "<stage>:<function or file name>"; anything un-canned falls back to
/// keyword heuristics so arbitrary docs still produce valid spaces.
class StubReasoningProvider : public ReasoningProvider {
 public:
  StubReasoningProvider() = default;
  explicit StubReasoningProvider(nlohmann::json canned);
  static StubReasoningProvider from_file(const std::string& path);

  nlohmann::json reason(const std::string& stage, const nlohmann::json& input) override;

 private:
  nlohmann::json canned_ = nlohmann::json::object();
};

std::unique_ptr<ReasoningProvider> make_http_reasoning_provider(const std::string& url,
                                                                int retries = 2);

class ToolchainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToolchainOptions {
  int provider_retries = 2;    // re-asks after schema-invalid responses
  int regeneration_passes = 2; // assemble-level lint/regenerate loop
};

/// Risk classification of one function.
SecurityLevel classify(const FunctionDoc& doc, ReasoningProvider& provider,
                       const ToolchainOptions& opts = {});

/// Predicts user intents for a conditional function and appends the fallback
/// entry. Refuses non-conditional functions and empty descriptions.
std::vector<IntentEntry> predict_intents(const FunctionDoc& doc, ReasoningProvider& provider,
                                         const ToolchainOptions& opts = {},
                                         std::optional<SecurityLevel> known_level = std::nullopt);

/// Generates the policy for one intent together with the metadata of every
/// context it depends on. Rules are re-requested until they parse and
/// typecheck against the returned metadata.
std::pair<Policy, std::vector<ContextMetadata>> generate_policy(
    const FunctionDoc& doc, const IntentEntry& intent, ReasoningProvider& provider,
    const ToolchainOptions& opts = {});

/// Full assembly: classify every input, predict intents and generate
/// policies for conditional ones, attach GUI bindings from the manifest, and
/// lint. Never returns a space with lint errors.
ContextSpace assemble_space(const std::string& app_id, const std::vector<FunctionDoc>& docs,
                            const std::optional<HandlerManifest>& manifest,
                            ReasoningProvider& provider, const ToolchainOptions& opts = {});

struct SourceFile {
  std::string name;
  std::string content;
};

/// Identifies GUI event handlers in source files. Files are pre-filtered by
/// GUI marker text before the provider sees them.
HandlerManifest identify_handlers(const std::vector<SourceFile>& sources,
                                  ReasoningProvider& provider, const ToolchainOptions& opts = {});

/// Call-graph lookup behind the manifest enrichment step.
class CallGraphProvider {
 public:
  virtual ~CallGraphProvider() = default;
  virtual std::vector<std::string> direct_callees(const std::string& function) = 0;
};

/// Reads a precomputed edges file: a JSON array of {"caller","callee"}.
class FileCallGraphProvider : public CallGraphProvider {
 public:
  explicit FileCallGraphProvider(const nlohmann::json& edges);
  static FileCallGraphProvider from_file(const std::string& path);
  std::vector<std::string> direct_callees(const std::string& function) override;

 private:
  std::map<std::string, std::vector<std::string>> edges_;
};

/// Populates each entry's callees with the functions reachable from its
/// handler. Cycles terminate; results are deduplicated in discovery order.
HandlerManifest attach_call_graphs(const HandlerManifest& manifest, CallGraphProvider& graph,
                                   std::vector<std::string>* warnings = nullptr);

struct ChangeLog {
  std::vector<FunctionDoc> added;
  std::vector<FunctionDoc> modified;
  std::vector<std::string> removed;

  static ChangeLog from_json(const nlohmann::json& j);
};

ChangeLog load_changelog(const std::string& path);

/// Applies an application changelog: removed entries are deleted (with
/// newly orphaned contexts garbage-collected), added ones generated fresh,
/// modified ones regenerated. Bumps the version; output lints clean.
ContextSpace evolve_from_changelog(const ContextSpace& space, const ChangeLog& changelog,
                                   ReasoningProvider& provider, const ToolchainOptions& opts = {});

struct Suggestion {
  enum class Kind { add_intent, add_function, review_rule, relax_rule, tighten_rule };
  Kind kind;
  std::string target;  // path into the space
  std::vector<std::uint64_t> evidence;  // event ids
  std::string rationale;

  nlohmann::json to_json() const;
};

const char* to_string(Suggestion::Kind k);

/// Deterministic statistics over the event log: repeated retrieval misses,
/// user overrides, and user reports cross their threshold K and become
/// suggestions. An optional provider only decorates the rationale prose.
std::vector<Suggestion> analyze_logs(const std::vector<ValidationEvent>& events, int threshold = 3,
                                     ReasoningProvider* provider = nullptr);

/// Paths (slash-separated, by id) at which two spaces' canonical forms
/// differ. Used to verify that evolution only touched what it should.
std::vector<std::string> diff_spaces(const ContextSpace& before, const ContextSpace& after);

}  // namespace ctxguard
