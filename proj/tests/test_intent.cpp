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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctxguard/intent.hpp"
#include "support/space_gen.hpp"

using namespace ctxguard;
using namespace ctxguard::testgen;

namespace {

IntentCatalog bank_catalog() { return IntentCatalog::from_space(tiny_conditional_space()); }

struct FailingExtractor : IntentExtractor {
  nlohmann::json extract_raw(const std::string&, const IntentCatalog&) override {
    throw std::runtime_error("provider unavailable");
  }
};

struct CannedExtractor : IntentExtractor {
  nlohmann::json doc;
  nlohmann::json extract_raw(const std::string&, const IntentCatalog&) override { return doc; }
};

}  // namespace

TEST_CASE("catalog: built verbatim from the space") {
  IntentCatalog catalog = bank_catalog();
  CHECK(catalog.functions.size() == 3);
  const CatalogFunction* transfer = catalog.find("transfer_money");
  REQUIRE(transfer != nullptr);
  CHECK(transfer->intents.size() == 2);
  REQUIRE(catalog.param_contexts.count("user_specified_recipients"));
  CHECK(catalog.param_contexts.at("user_specified_recipients") == ValueType::string_list);
}

TEST_CASE("extract: keyword stub selects intents and pulls parameters") {
  IntentCatalog catalog = bank_catalog();
  KeywordExtractor stub;
  ExtractionResult r = extract("send 200 to alice", catalog, stub);
  REQUIRE(r.selections.count("transfer_money"));
  CHECK(r.selections.at("transfer_money") ==
        std::vector<std::string>{"send_to_specified_recipient"});
  REQUIRE(r.param_values.count("user_specified_recipients"));
  CHECK(std::get<StringList>(r.param_values.at("user_specified_recipients")) ==
        StringList{"alice"});
  CHECK(!r.degraded);
}

TEST_CASE("extract: empty instruction yields empty result") {
  IntentCatalog catalog = bank_catalog();
  KeywordExtractor stub;
  ExtractionResult r = extract("", catalog, stub);
  CHECK(r.selections.empty());
  CHECK(r.param_values.empty());
  CHECK(r.predicted_sequence.empty());
}

TEST_CASE("extract: unknown intents and functions are dropped with warnings") {
  IntentCatalog catalog = bank_catalog();
  CannedExtractor canned;
  canned.doc = {{"selections",
                 {{"transfer_money", {"send_to_specified_recipient", "made_up"}},
                  {"ghost_function", {"whatever"}}}},
                {"param_values", {{"user_specified_recipients", {"alice"}}, {"ghost_ctx", 1}}},
                {"predicted_sequence", {"transfer_money", "ghost_function"}}};
  ExtractionResult r = extract("x", catalog, canned);
  CHECK(r.selections.size() == 1);
  CHECK(r.selections.at("transfer_money") ==
        std::vector<std::string>{"send_to_specified_recipient"});
  CHECK(r.param_values.size() == 1);
  CHECK(r.predicted_sequence == std::vector<std::string>{"transfer_money"});
  CHECK(r.warnings.size() == 3);
}

TEST_CASE("extract: provider failure degrades") {
  IntentCatalog catalog = bank_catalog();
  FailingExtractor failing;
  ExtractionResult r = extract("send 200 to alice", catalog, failing);
  CHECK(r.degraded);
  CHECK(r.selections.empty());
}

TEST_CASE("extract: stub output is reproducible") {
  IntentCatalog catalog = bank_catalog();
  KeywordExtractor stub;
  auto a = stub.extract_raw("send 200 to alice then check my balance", catalog);
  auto b = stub.extract_raw("send 200 to alice then check my balance", catalog);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("cosine: identities and the hand-computed example") {
  EmbeddingVector u = {1, 2, 2};
  EmbeddingVector v = {2, 1, 2};
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine(u, v) == doctest::Approx(8.0 / 9.0));
  CHECK(cosine({0, 0}, {1, 1}) == doctest::Approx(0.0));  // zero norm
  CHECK_THROWS_AS(cosine({1, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("cosine: symmetry and positive scale invariance") {
  HashedBagEmbedder embedder;
  EmbeddingVector a = embedder.embed("send money to a known recipient");
  EmbeddingVector b = embedder.embed("delete the file the user named");
  CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)));
  EmbeddingVector a3 = a;
  for (auto& x : a3) x *= 3.0;
  CHECK(cosine(a3, b) == doctest::Approx(cosine(a, b)));
}

TEST_CASE("refine: multiple raw selections pick the highest similarity") {
  ContextSpace s = tiny_conditional_space();
  auto& transfer = (*s.functions)[1];
  IntentEntry second;
  second.intent_id = "schedule_recurring_payment";
  second.description = "schedule a recurring monthly payment plan";
  transfer.intents.insert(transfer.intents.begin() + 1, second);
  Policy p;
  p.rules.push_back({"amount", "amount <= daily_limit", "limit"});
  transfer.policies.emplace("schedule_recurring_payment", p);

  IntentCatalog catalog = IntentCatalog::from_space(s);
  HashedBagEmbedder embedder;
  RefinedIntent r = refine("transfer_money",
                           {"send_to_specified_recipient", "schedule_recurring_payment"},
                           "schedule a recurring monthly payment plan", catalog, embedder, 0.35);
  CHECK(r.kind == RefinedIntent::Kind::intent);
  CHECK(r.intent_id == "schedule_recurring_payment");

  r = refine("transfer_money", {"send_to_specified_recipient", "schedule_recurring_payment"},
             "send money to the recipient the user specified", catalog, embedder, 0.35);
  CHECK(r.intent_id == "send_to_specified_recipient");
}

TEST_CASE("refine: single selection wins regardless of threshold") {
  IntentCatalog catalog = bank_catalog();
  HashedBagEmbedder embedder;
  RefinedIntent r = refine("transfer_money", {"send_to_specified_recipient"},
                           "completely unrelated text", catalog, embedder, 0.99);
  CHECK(r.kind == RefinedIntent::Kind::intent);
  CHECK(r.intent_id == "send_to_specified_recipient");
}

TEST_CASE("refine: no selection falls back under the threshold") {
  IntentCatalog catalog = bank_catalog();
  HashedBagEmbedder embedder;
  // Unrelated instruction, fallback declared on transfer_money.
  RefinedIntent r = refine("transfer_money", {}, "check my balance", catalog, embedder, 0.35);
  CHECK(r.kind == RefinedIntent::Kind::fallback);

  // Related enough to clear the threshold without a selection.
  r = refine("transfer_money", {}, "send money to the recipient the user specified", catalog,
             embedder, 0.35);
  CHECK(r.kind == RefinedIntent::Kind::intent);
  CHECK(r.intent_id == "send_to_specified_recipient");
}

TEST_CASE("refine: no fallback declared yields unrelated") {
  ContextSpace s = tiny_conditional_space();
  auto& transfer = (*s.functions)[1];
  transfer.intents.pop_back();  // drop the fallback
  IntentCatalog catalog = IntentCatalog::from_space(s);
  HashedBagEmbedder embedder;
  RefinedIntent r = refine("transfer_money", {}, "check my balance", catalog, embedder, 0.35);
  CHECK(r.kind == RefinedIntent::Kind::unrelated);
}

TEST_CASE("refine: output for nonempty selections is threshold-independent") {
  IntentCatalog catalog = bank_catalog();
  HashedBagEmbedder embedder;
  for (double threshold : {0.0, 0.35, 0.99}) {
    RefinedIntent r = refine("transfer_money", {"send_to_specified_recipient"},
                             "whatever text", catalog, embedder, threshold);
    CHECK(r.intent_id == "send_to_specified_recipient");
  }
}

TEST_CASE("check_order: prediction prefix must have executed") {
  std::vector<std::string> predicted = {"a", "b", "c"};

  CHECK(!check_order(predicted, std::vector<std::string>{"a"}, "b").has_value());
  CHECK(!check_order(predicted, std::vector<std::string>{}, "a").has_value());

  auto violation = check_order(predicted, std::vector<std::string>{}, "c");
  REQUIRE(violation.has_value());
  CHECK(violation->missing == "a");

  CHECK(!check_order(predicted, std::vector<std::string>{"a", "b"}, "c").has_value());
  CHECK(!check_order(predicted, std::vector<std::string>{}, "d").has_value());  // unconstrained
  CHECK(!check_order({}, std::vector<std::string>{}, "a").has_value());
}

TEST_CASE("stub embedder: fixed dimension, deterministic") {
  HashedBagEmbedder embedder;
  EmbeddingVector v = embedder.embed("send money now");
  CHECK(v.size() == HashedBagEmbedder::kDim);
  CHECK(v == embedder.embed("send money now"));
  double sum = 0;
  for (double x : v) sum += x;
  CHECK(sum == doctest::Approx(3.0));  // one count per token
}
