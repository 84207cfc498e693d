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
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxguard/acquisition.hpp"
#include "ctxguard/intent.hpp"
#include "ctxguard/space.hpp"

namespace ctxguard {

/// What caused a refresh: space load/activation, a new user instruction, or
/// the pre-validation step. load refreshes every temperature once; the other
/// two map to warm and hot respectively.
enum class UpdateTrigger { load, instruction, pre_validation };

const char* to_string(UpdateTrigger t);

struct HistoryItem {
  std::string function_id;
  nlohmann::json params;
  std::string outcome;
};

/// Per-connection agent session. Owned and mutated by one logical thread;
/// the extraction future is the only cross-thread handoff.
struct Session {
  std::string session_id;
  std::optional<std::string> active_app;
  std::shared_ptr<const ContextSpace> space;
  std::shared_ptr<const IntentCatalog> catalog;
  ContextVector vector;
  std::vector<HistoryItem> history;

  struct Extraction {
    std::uint64_t generation = 0;   // bumped per instruction; latest wins
    std::string instruction;
    std::shared_future<nlohmann::json> raw;  // provider output, may be invalid
    std::uint64_t ingested_generation = 0;
    std::optional<ExtractionResult> latest;
  } extraction;

  std::vector<std::string> executed_function_ids() const;
};

/// LRU cache of parsed context spaces with optional pinning. Pinned apps are
/// never evicted; when every resident entry is pinned and the cache is full,
/// new spaces are activated without being cached.
class SpaceCache {
 public:
  SpaceCache(std::size_t capacity, std::set<std::string> pinned = {});

  std::shared_ptr<const ContextSpace> get(const std::string& app_id);  // touches recency
  /// Returns the evicted app id, if any.
  std::optional<std::string> insert(std::shared_ptr<const ContextSpace> space);
  bool contains(const std::string& app_id) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  /// Most-recent-first app ids (test/diagnostic hook).
  std::vector<std::string> recency_order() const;
  const std::vector<std::string>& eviction_log() const { return evictions_; }

 private:
  std::size_t capacity_;
  std::set<std::string> pinned_;
  std::list<std::pair<std::string, std::shared_ptr<const ContextSpace>>> lru_;  // front = MRU
  std::map<std::string, decltype(lru_)::iterator> index_;
  std::vector<std::string> evictions_;
  mutable std::mutex mtx_;
};

class ContextManagerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Owns the space cache and acquisition providers, and drives context-vector
/// lifecycle for sessions: activation, temperature refreshes, extraction
/// ingestion, and action recording.
class ContextManager {
 public:
  ContextManager(std::size_t cache_capacity, std::set<std::string> pinned,
                 AcquisitionProviders providers);

  /// Caches (unless already resident) and activates the space. The space
  /// must lint clean. A fresh load refreshes every temperature once; a
  /// cached re-register only refreshes cold values.
  void register_space(Session& session, ContextSpace space);
  void register_space(Session& session, std::shared_ptr<const ContextSpace> space);

  /// Cache hit: activates without loading and refreshes cold values.
  /// Returns false on miss (caller must register the space).
  bool switch_app(Session& session, const std::string& app_id);

  /// Re-resolves exactly the contexts whose temperature matches the trigger
  /// and bumps their update counters. Returns the number touched.
  std::size_t refresh(Session& session, UpdateTrigger trigger);

  /// Starts a new instruction: invalidates stale instruction-derived values,
  /// bumps the extraction generation, and refreshes warm contexts.
  void begin_instruction(Session& session, const std::string& text);

  /// Writes the validated extraction into the session: parameter values for
  /// user_request contexts, selections, and the predicted sequence.
  void ingest_extraction(Session& session, const ExtractionResult& result,
                         std::vector<std::string>* warnings = nullptr);

  /// Applies agent-chosen parameters to func_params contexts (pre-action).
  void apply_func_params(Session& session, const nlohmann::json& params,
                         std::vector<std::string>* warnings = nullptr);

  /// Post-completion bookkeeping: func_params values, agent_history
  /// contexts, and the executed-action history.
  void record_action(Session& session, const std::string& function_id,
                     const nlohmann::json& params, const std::string& outcome);

  SpaceCache& cache() { return cache_; }
  std::uint64_t load_count() const { return load_count_; }

 private:
  void activate(Session& session, std::shared_ptr<const ContextSpace> space, bool fresh_load);
  std::size_t refresh_temperatures(Session& session, bool cold, bool warm, bool hot,
                                   const char* trigger);

  SpaceCache cache_;
  AcquisitionProviders providers_;
  std::uint64_t load_count_ = 0;
};

}  // namespace ctxguard
