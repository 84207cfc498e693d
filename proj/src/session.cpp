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

#include "ctxguard/session.hpp"

#include <algorithm>

namespace ctxguard {

const char* to_string(UpdateTrigger t) {
  switch (t) {
    case UpdateTrigger::load: return "load";
    case UpdateTrigger::instruction: return "instruction";
    case UpdateTrigger::pre_validation: return "pre_validation";
  }
  return "?";
}

std::vector<std::string> Session::executed_function_ids() const {
  std::vector<std::string> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back(h.function_id);
  return out;
}

// ---------------------------------------------------------------------------
// SpaceCache
// ---------------------------------------------------------------------------

SpaceCache::SpaceCache(std::size_t capacity, std::set<std::string> pinned)
    : capacity_(capacity == 0 ? 1 : capacity), pinned_(std::move(pinned)) {}

std::shared_ptr<const ContextSpace> SpaceCache::get(const std::string& app_id) {
  std::lock_guard lock(mtx_);
  auto it = index_.find(app_id);
  if (it == index_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

std::optional<std::string> SpaceCache::insert(std::shared_ptr<const ContextSpace> space) {
  std::lock_guard lock(mtx_);
  const std::string& app_id = space->app_id;
  auto it = index_.find(app_id);
  if (it != index_.end()) {
    it->second->second = std::move(space);
    lru_.splice(lru_.begin(), lru_, it->second);
    return std::nullopt;
  }
  std::optional<std::string> evicted;
  if (lru_.size() >= capacity_) {
    // Evict the least-recently-used unpinned entry. If everything resident
    // is pinned, the new space stays uncached rather than growing the cache.
    for (auto victim = lru_.rbegin(); victim != lru_.rend(); ++victim) {
      if (pinned_.count(victim->first)) continue;
      evicted = victim->first;
      index_.erase(victim->first);
      lru_.erase(std::next(victim).base());
      break;
    }
    if (!evicted) return std::nullopt;
    evictions_.push_back(*evicted);
  }
  lru_.emplace_front(app_id, std::move(space));
  index_[app_id] = lru_.begin();
  return evicted;
}

bool SpaceCache::contains(const std::string& app_id) const {
  std::lock_guard lock(mtx_);
  return index_.count(app_id) > 0;
}

std::size_t SpaceCache::size() const {
  std::lock_guard lock(mtx_);
  return lru_.size();
}

std::vector<std::string> SpaceCache::recency_order() const {
  std::lock_guard lock(mtx_);
  std::vector<std::string> out;
  for (const auto& [id, space] : lru_) {
    (void)space;
    out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ContextManager
// ---------------------------------------------------------------------------

ContextManager::ContextManager(std::size_t cache_capacity, std::set<std::string> pinned,
                               AcquisitionProviders providers)
    : cache_(cache_capacity, std::move(pinned)), providers_(std::move(providers)) {}

void ContextManager::register_space(Session& session, ContextSpace space) {
  register_space(session, std::make_shared<const ContextSpace>(std::move(space)));
}

void ContextManager::register_space(Session& session,
                                    std::shared_ptr<const ContextSpace> space) {
  auto findings = lint_space(*space);
  if (!lint_clean(findings)) {
    std::string detail;
    for (const auto& f : findings)
      if (f.severity == Severity::error) {
        detail = f.path + ": " + f.message;
        break;
      }
    throw ContextManagerError("space '" + space->app_id + "' fails lint: " + detail);
  }
  if (auto cached = cache_.get(space->app_id)) {
    activate(session, std::move(cached), /*fresh_load=*/false);
    return;
  }
  ++load_count_;
  cache_.insert(space);
  activate(session, std::move(space), /*fresh_load=*/true);
}

bool ContextManager::switch_app(Session& session, const std::string& app_id) {
  auto cached = cache_.get(app_id);
  if (!cached) return false;
  activate(session, std::move(cached), /*fresh_load=*/false);
  return true;
}

void ContextManager::activate(Session& session, std::shared_ptr<const ContextSpace> space,
                              bool fresh_load) {
  session.active_app = space->app_id;
  session.catalog = std::make_shared<const IntentCatalog>(IntentCatalog::from_space(*space));
  session.vector = init_vector(*space);
  session.space = std::move(space);
  // A pending extraction was computed against the previous catalog; drop it.
  // The action history is session-scoped and survives app switches.
  session.extraction = {};
  if (fresh_load)
    refresh_temperatures(session, true, true, true, "load");
  else
    refresh_temperatures(session, true, false, false, "load");
}

std::size_t ContextManager::refresh(Session& session, UpdateTrigger trigger) {
  switch (trigger) {
    case UpdateTrigger::load: return refresh_temperatures(session, true, true, true, "load");
    case UpdateTrigger::instruction:
      return refresh_temperatures(session, false, true, false, "instruction");
    case UpdateTrigger::pre_validation:
      return refresh_temperatures(session, false, false, true, "pre_validation");
  }
  return 0;
}

std::size_t ContextManager::refresh_temperatures(Session& session, bool cold, bool warm,
                                                 bool hot, const char* trigger) {
  if (!session.active_app) throw ContextManagerError("no active app");
  std::size_t touched = 0;
  for (auto& [id, entry] : session.vector) {
    (void)id;
    bool match = (entry.metadata.tempr == Temperature::cold && cold) ||
                 (entry.metadata.tempr == Temperature::warm && warm) ||
                 (entry.metadata.tempr == Temperature::hot && hot);
    if (!match) continue;
    ++touched;
    entry.update_count += 1;
    entry.last_trigger = trigger;
    if (const auto* resolver = providers_.find(entry.metadata.src)) {
      auto v = (*resolver)(entry.metadata);
      if (v && value_type(*v) == entry.metadata.type)
        entry.value = std::move(*v);
      else
        entry.value.reset();  // unavailable -> unset, fail closed
    }
    // Sources without a resolver (user_request, func_params, agent_history)
    // keep their event-driven values.
  }
  return touched;
}

void ContextManager::begin_instruction(Session& session, const std::string& text) {
  if (!session.active_app) throw ContextManagerError("no active app");
  // A new instruction invalidates values extracted from the previous one.
  for (auto& [id, entry] : session.vector) {
    (void)id;
    if (entry.metadata.src == Source::user_request) entry.value.reset();
  }
  session.extraction.generation += 1;
  session.extraction.instruction = text;
  session.extraction.raw = {};
  session.extraction.latest.reset();
  refresh(session, UpdateTrigger::instruction);
}

void ContextManager::ingest_extraction(Session& session, const ExtractionResult& result,
                                       std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  for (const auto& [ctx_id, value] : result.param_values) {
    const ContextEntry* entry = session.vector.find(ctx_id);
    if (!entry) {
      warn("extracted value for unknown context '" + ctx_id + "'");
      continue;
    }
    if (entry->metadata.src != Source::user_request) {
      warn("extraction may not write non-user_request context '" + ctx_id + "'");
      continue;
    }
    if (session.vector.set(ctx_id, value) != ContextVector::SetStatus::ok)
      warn("type mismatch for extracted context '" + ctx_id + "'");
  }
  session.extraction.latest = result;
  session.extraction.ingested_generation = session.extraction.generation;
}

void ContextManager::apply_func_params(Session& session, const nlohmann::json& params,
                                       std::vector<std::string>* warnings) {
  if (!params.is_object()) return;
  for (const auto& [name, jval] : params.items()) {
    ContextEntry* entry = session.vector.find(name);
    if (!entry || entry->metadata.src != Source::func_params) continue;  // undeclared: ignored
    if (session.vector.set_from_json(name, jval) != ContextVector::SetStatus::ok && warnings)
      warnings->push_back("type mismatch for parameter context '" + name + "'");
  }
}

void ContextManager::record_action(Session& session, const std::string& function_id,
                                   const nlohmann::json& params, const std::string& outcome) {
  apply_func_params(session, params);
  for (auto& [id, entry] : session.vector) {
    (void)id;
    if (entry.metadata.src != Source::agent_history) continue;
    // The acquisition descriptor picks what gets recorded; default is the
    // executed function id.
    const std::string& what = entry.metadata.acquisition == "outcomes" ? outcome : function_id;
    switch (entry.metadata.type) {
      case ValueType::string_list: {
        StringList list;
        if (entry.value) list = std::get<StringList>(*entry.value);
        list.push_back(what);
        entry.value = Value{std::move(list)};
        break;
      }
      case ValueType::string:
        entry.value = Value{what};
        break;
      case ValueType::integer: {
        std::int64_t n = entry.value ? std::get<std::int64_t>(*entry.value) : 0;
        entry.value = Value{n + 1};
        break;
      }
      default:
        break;
    }
  }
  session.history.push_back({function_id, params.is_object() ? params : nlohmann::json::object(),
                             outcome});
}

}  // namespace ctxguard
