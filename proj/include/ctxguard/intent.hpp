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

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxguard/space.hpp"
#include "ctxguard/value.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Intent engine: turns a user instruction into per-function intent
// selections, instruction-derived context values, and a predicted execution
// sequence, then refines selections with embedding cosine similarity.
// ---------------------------------------------------------------------------

struct CatalogIntent {
  std::string intent_id;
  std::string description;
  bool is_fallback = false;
};

struct CatalogFunction {
  std::string function_id;
  std::vector<CatalogIntent> intents;
};

/// Read-only view over the active space: every function intent plus the
/// instruction-extractable contexts with their declared types.
struct IntentCatalog {
  std::vector<CatalogFunction> functions;
  std::map<std::string, ValueType> param_contexts;

  static IntentCatalog from_space(const ContextSpace& space);
  const CatalogFunction* find(std::string_view function_id) const;
  nlohmann::json to_json() const;
};

struct ExtractionResult {
  std::map<std::string, std::vector<std::string>> selections;  // function -> intents
  std::map<std::string, Value> param_values;
  std::vector<std::string> predicted_sequence;
  std::vector<std::string> warnings;
  bool degraded = false;
};

using EmbeddingVector = std::vector<double>;

/// Provider contract. Extractors return the raw wire document
/// {"selections":{fn:[ids]},"param_values":{ctx:v},"predicted_sequence":[fn]};
/// validation against the catalog happens in extract().
class IntentExtractor {
 public:
  virtual ~IntentExtractor() = default;
  virtual nlohmann::json extract_raw(const std::string& instruction,
                                     const IntentCatalog& catalog) = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
};

/// Deterministic offline extractor: an intent is selected when the
/// instruction shares at least one informative token with its description;
/// parameter values are pulled out with small positional heuristics
/// (numbers, "to <name>" runs, path-like and quoted tokens).
class KeywordExtractor : public IntentExtractor {
 public:
  nlohmann::json extract_raw(const std::string& instruction,
                             const IntentCatalog& catalog) override;
};

/// Deterministic offline embedder: hashed token counts over a fixed number
/// of buckets.
class HashedBagEmbedder : public Embedder {
 public:
  static constexpr std::size_t kDim = 256;
  EmbeddingVector embed(const std::string& text) override;
};

/// Test/diagnostics extractor that sleeps before answering; used to drive
/// the extraction-timeout path.
class StallingExtractor : public IntentExtractor {
 public:
  explicit StallingExtractor(int stall_ms) : stall_ms_(stall_ms) {}
  nlohmann::json extract_raw(const std::string& instruction,
                             const IntentCatalog& catalog) override;

 private:
  int stall_ms_;
};

/// Remote extractor speaking the JSON wire contract over HTTP POST; retries
/// schema-invalid responses a bounded number of times, then degrades.
std::unique_ptr<IntentExtractor> make_http_extractor(const std::string& url, int retries = 2);
std::unique_ptr<Embedder> make_http_embedder(const std::string& url, int retries = 2);

/// Runs the provider and validates its output against the catalog: unknown
/// functions/intents are dropped with warnings, parameter values are
/// type-coerced or dropped. Provider failure yields an empty result flagged
/// degraded.
ExtractionResult extract(const std::string& instruction, const IntentCatalog& catalog,
                         IntentExtractor& provider);

/// Validation half of extract(), for callers that already hold the raw
/// provider document.
ExtractionResult validate_extraction(const nlohmann::json& raw, const IntentCatalog& catalog);

/// Standard cosine similarity; zero-norm vectors compare as 0. Throws
/// std::invalid_argument on dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

struct RefinedIntent {
  enum class Kind { intent, fallback, unrelated };
  Kind kind = Kind::unrelated;
  std::string intent_id;  // set when kind == intent
};

/// Refines the extractor's selections for one function:
///  - two or more raw intents: highest cosine(instruction, description) wins,
///    ties broken by catalog order;
///  - exactly one: taken as-is;
///  - none: the best non-fallback similarity is compared against the
///    threshold; below it the fallback intent applies when declared,
///    otherwise the instruction is unrelated to this function.
RefinedIntent refine(const std::string& function_id, const std::vector<std::string>& raw_intents,
                     const std::string& instruction, const IntentCatalog& catalog,
                     Embedder& embedder, double threshold);

struct OrderViolation {
  std::string missing;  // first predicted predecessor that has not executed
};

/// Order check over the predicted execution sequence: before `next` may run,
/// every function preceding its first occurrence in the prediction must have
/// executed. Functions absent from the prediction are unconstrained.
std::optional<OrderViolation> check_order(std::span<const std::string> predicted_sequence,
                                          std::span<const std::string> executed,
                                          const std::string& next);

}  // namespace ctxguard
