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

#include "ctxguard/intent.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <set>
#include <thread>

namespace ctxguard {

IntentCatalog IntentCatalog::from_space(const ContextSpace& space) {
  IntentCatalog catalog;
  for (const FunctionEntry* f : space.all_functions()) {
    CatalogFunction cf;
    cf.function_id = f->function_id;
    for (const auto& intent : f->intents) {
      cf.intents.push_back({intent.intent_id, intent.description, intent.is_fallback});
      for (const auto& ctx_id : intent.param_contexts) {
        if (const ContextMetadata* m = space.find_context(ctx_id))
          catalog.param_contexts.emplace(ctx_id, m->type);
      }
    }
    catalog.functions.push_back(std::move(cf));
  }
  return catalog;
}

const CatalogFunction* IntentCatalog::find(std::string_view function_id) const {
  for (const auto& f : functions)
    if (f.function_id == function_id) return &f;
  return nullptr;
}

nlohmann::json IntentCatalog::to_json() const {
  nlohmann::json fns = nlohmann::json::array();
  for (const auto& f : functions) {
    nlohmann::json intents = nlohmann::json::array();
    for (const auto& i : f.intents)
      intents.push_back({{"intent_id", i.intent_id},
                         {"description", i.description},
                         {"is_fallback", i.is_fallback}});
    fns.push_back({{"function_id", f.function_id}, {"intents", std::move(intents)}});
  }
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [id, type] : param_contexts) params[id] = value_type_name(type);
  return {{"functions", std::move(fns)}, {"param_contexts", std::move(params)}};
}

// ---------------------------------------------------------------------------
// Tokenization shared by the stub providers
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '.' || c == '_') {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",  "an",  "the", "to",   "my",   "in",  "of",   "for", "and",  "or",
      "is", "are", "on",  "at",   "with", "me",  "please", "from", "it", "this",
      "that", "do", "can", "you", "i",    "be",  "then"};
  return words;
}

bool is_number_token(const std::string& t) {
  if (t.empty()) return false;
  bool dot = false;
  for (char c : t) {
    if (c == '.') {
      if (dot) return false;
      dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return std::isdigit(static_cast<unsigned char>(t.front())) != 0;
}

bool is_path_token(const std::string& t) { return t.find('/') != std::string::npos; }

bool id_contains_any(const std::string& id, std::initializer_list<const char*> needles) {
  for (const char* n : needles)
    if (id.find(n) != std::string::npos) return true;
  return false;
}

std::vector<std::string> quoted_spans(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('"', pos)) != std::string_view::npos) {
    std::size_t end = text.find('"', pos + 1);
    if (end == std::string_view::npos) break;
    out.emplace_back(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stub providers
// ---------------------------------------------------------------------------

nlohmann::json KeywordExtractor::extract_raw(const std::string& instruction,
                                             const IntentCatalog& catalog) {
  std::vector<std::string> tokens = tokenize(instruction);
  std::set<std::string> informative;
  std::map<std::string, std::size_t> first_pos;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (stopwords().count(tokens[i])) continue;
    informative.insert(tokens[i]);
    first_pos.emplace(tokens[i], i);
  }

  nlohmann::json selections = nlohmann::json::object();
  std::vector<std::pair<std::size_t, std::string>> sequence;  // (position, function)
  for (const auto& fn : catalog.functions) {
    std::vector<std::string> chosen;
    std::size_t fn_pos = tokens.size();
    for (const auto& intent : fn.intents) {
      if (intent.is_fallback) continue;
      bool hit = false;
      for (const auto& t : tokenize(intent.description)) {
        if (stopwords().count(t)) continue;
        auto it = first_pos.find(t);
        if (it != first_pos.end()) {
          hit = true;
          fn_pos = std::min(fn_pos, it->second);
        }
      }
      if (hit) chosen.push_back(intent.intent_id);
    }
    if (!chosen.empty()) {
      selections[fn.function_id] = chosen;
      sequence.emplace_back(fn_pos, fn.function_id);
    }
  }
  std::stable_sort(sequence.begin(), sequence.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  nlohmann::json predicted = nlohmann::json::array();
  for (const auto& [pos, fn] : sequence) {
    (void)pos;
    predicted.push_back(fn);
  }

  // Parameter heuristics. Numbers fill numeric parameters in catalog order;
  // "to <name>" runs fill recipient-like parameters; path-like tokens fill
  // path-like parameters; quoted spans fill the remaining string parameters.
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> numbers;
  std::vector<std::string> names_after_to;
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_number_token(tokens[i])) {
      numbers.push_back(tokens[i]);
    } else if (is_path_token(tokens[i])) {
      paths.push_back(tokens[i]);
    } else if (tokens[i] == "to") {
      for (std::size_t j = i + 1; j < tokens.size(); ++j) {
        if (stopwords().count(tokens[j]) || is_number_token(tokens[j])) break;
        if (is_path_token(tokens[j])) break;
        names_after_to.push_back(tokens[j]);
      }
    }
  }
  std::vector<std::string> quotes = quoted_spans(instruction);

  std::size_t number_i = 0;
  std::size_t quote_i = 0;
  for (const auto& [ctx_id, type] : catalog.param_contexts) {
    switch (type) {
      case ValueType::integer:
      case ValueType::floating:
        if (number_i < numbers.size()) {
          if (type == ValueType::integer)
            params[ctx_id] = std::stoll(numbers[number_i++]);
          else
            params[ctx_id] = std::stod(numbers[number_i++]);
        }
        break;
      case ValueType::string:
        if (id_contains_any(ctx_id, {"recipient", "contact", "target", "name"})) {
          if (!names_after_to.empty()) params[ctx_id] = names_after_to.front();
        } else if (id_contains_any(ctx_id, {"path", "file", "dir", "folder"})) {
          if (!paths.empty()) params[ctx_id] = paths.front();
        } else if (quote_i < quotes.size()) {
          params[ctx_id] = quotes[quote_i++];
        }
        break;
      case ValueType::string_list:
        if (id_contains_any(ctx_id, {"recipient", "contact", "target", "name", "biller", "room"})) {
          if (!names_after_to.empty()) params[ctx_id] = names_after_to;
        } else if (id_contains_any(ctx_id, {"path", "file", "dir", "folder"})) {
          if (!paths.empty()) params[ctx_id] = paths;
        }
        break;
      case ValueType::boolean:
        break;
    }
  }

  return {{"selections", std::move(selections)},
          {"param_values", std::move(params)},
          {"predicted_sequence", std::move(predicted)}};
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

EmbeddingVector HashedBagEmbedder::embed(const std::string& text) {
  EmbeddingVector v(kDim, 0.0);
  for (const auto& t : tokenize(text)) v[fnv1a(t) % kDim] += 1.0;
  return v;
}

nlohmann::json StallingExtractor::extract_raw(const std::string& instruction,
                                              const IntentCatalog& catalog) {
  (void)instruction;
  (void)catalog;
  std::this_thread::sleep_for(std::chrono::milliseconds(stall_ms_));
  return {{"selections", nlohmann::json::object()},
          {"param_values", nlohmann::json::object()},
          {"predicted_sequence", nlohmann::json::array()}};
}

// ---------------------------------------------------------------------------
// Validated extraction
// ---------------------------------------------------------------------------

ExtractionResult extract(const std::string& instruction, const IntentCatalog& catalog,
                         IntentExtractor& provider) {
  ExtractionResult result;
  nlohmann::json raw;
  try {
    raw = provider.extract_raw(instruction, catalog);
  } catch (const std::exception& e) {
    result.degraded = true;
    result.warnings.push_back(std::string("extractor failed: ") + e.what());
    return result;
  }
  return validate_extraction(raw, catalog);
}

ExtractionResult validate_extraction(const nlohmann::json& raw, const IntentCatalog& catalog) {
  ExtractionResult result;
  if (!raw.is_object()) {
    result.degraded = true;
    result.warnings.push_back("extractor returned a non-object document");
    return result;
  }

  if (auto it = raw.find("selections"); it != raw.end() && it->is_object()) {
    for (const auto& [fn_id, intents] : it->items()) {
      const CatalogFunction* fn = catalog.find(fn_id);
      if (!fn) {
        result.warnings.push_back("dropped selection for unknown function '" + fn_id + "'");
        continue;
      }
      if (!intents.is_array()) continue;
      std::vector<std::string> valid;
      for (const auto& intent : intents) {
        if (!intent.is_string()) continue;
        std::string id = intent.get<std::string>();
        bool known = std::any_of(fn->intents.begin(), fn->intents.end(),
                                 [&](const CatalogIntent& ci) { return ci.intent_id == id; });
        if (known)
          valid.push_back(std::move(id));
        else
          result.warnings.push_back("dropped unknown intent '" + id + "' for '" + fn_id + "'");
      }
      if (!valid.empty()) result.selections.emplace(fn_id, std::move(valid));
    }
  }

  if (auto it = raw.find("param_values"); it != raw.end() && it->is_object()) {
    for (const auto& [ctx_id, jval] : it->items()) {
      auto decl = catalog.param_contexts.find(ctx_id);
      if (decl == catalog.param_contexts.end()) {
        result.warnings.push_back("dropped value for undeclared param context '" + ctx_id + "'");
        continue;
      }
      auto v = value_from_json(jval, decl->second, /*coerce=*/true);
      if (!v) {
        result.warnings.push_back("dropped type-mismatched value for '" + ctx_id + "'");
        continue;
      }
      result.param_values.emplace(ctx_id, std::move(*v));
    }
  }

  if (auto it = raw.find("predicted_sequence"); it != raw.end() && it->is_array()) {
    for (const auto& fn : *it) {
      if (!fn.is_string()) continue;
      std::string id = fn.get<std::string>();
      if (catalog.find(id))
        result.predicted_sequence.push_back(std::move(id));
      else
        result.warnings.push_back("dropped unknown function '" + id + "' from sequence");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cosine refinement
// ---------------------------------------------------------------------------

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

RefinedIntent refine(const std::string& function_id, const std::vector<std::string>& raw_intents,
                     const std::string& instruction, const IntentCatalog& catalog,
                     Embedder& embedder, double threshold) {
  const CatalogFunction* fn = catalog.find(function_id);
  if (!fn) return {RefinedIntent::Kind::unrelated, {}};

  const CatalogIntent* fallback = nullptr;
  for (const auto& intent : fn->intents)
    if (intent.is_fallback) fallback = &intent;

  // Selections are validated upstream, but guard against stray ids anyway.
  std::vector<const CatalogIntent*> raw;
  for (const auto& intent : fn->intents) {
    if (std::find(raw_intents.begin(), raw_intents.end(), intent.intent_id) != raw_intents.end())
      raw.push_back(&intent);
  }

  if (raw.size() == 1) return {RefinedIntent::Kind::intent, raw.front()->intent_id};

  EmbeddingVector iv = embedder.embed(instruction);
  auto argmax = [&](const std::vector<const CatalogIntent*>& candidates,
                    double* best_score) -> const CatalogIntent* {
    const CatalogIntent* best = nullptr;
    double score = -2.0;
    for (const CatalogIntent* c : candidates) {
      double s = cosine(iv, embedder.embed(c->description));
      if (s > score) {  // strict: earlier (catalog-order) candidate wins ties
        score = s;
        best = c;
      }
    }
    if (best_score) *best_score = score;
    return best;
  };

  if (raw.size() >= 2) {
    const CatalogIntent* best = argmax(raw, nullptr);
    return {RefinedIntent::Kind::intent, best->intent_id};
  }

  // Nothing selected: probe every non-fallback intent against the threshold.
  std::vector<const CatalogIntent*> candidates;
  for (const auto& intent : fn->intents)
    if (!intent.is_fallback) candidates.push_back(&intent);
  double best_score = -2.0;
  const CatalogIntent* best = candidates.empty() ? nullptr : argmax(candidates, &best_score);
  if (best && best_score >= threshold) return {RefinedIntent::Kind::intent, best->intent_id};
  if (fallback) return {RefinedIntent::Kind::fallback, fallback->intent_id};
  return {RefinedIntent::Kind::unrelated, {}};
}

std::optional<OrderViolation> check_order(std::span<const std::string> predicted_sequence,
                                          std::span<const std::string> executed,
                                          const std::string& next) {
  auto it = std::find(predicted_sequence.begin(), predicted_sequence.end(), next);
  if (it == predicted_sequence.end()) return std::nullopt;
  std::set<std::string> done(executed.begin(), executed.end());
  for (auto p = predicted_sequence.begin(); p != it; ++p)
    if (!done.count(*p)) return OrderViolation{*p};
  return std::nullopt;
}

}  // namespace ctxguard
