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

#include "ctxguard/session.hpp"
#include "support/oracles.hpp"
#include "support/space_gen.hpp"

using namespace ctxguard;
using namespace ctxguard::testgen;

namespace {

nlohmann::json bank_acquisition() { return {{"bank.daily_limit", 500}}; }

ContextManager make_manager(std::size_t capacity = 8, std::set<std::string> pinned = {}) {
  return ContextManager(capacity, std::move(pinned), fixture_acquisition(bank_acquisition()));
}

ContextSpace named_space(const std::string& app_id) {
  ContextSpace s = minimal_space();
  s.app_id = app_id;
  return s;
}

}  // namespace

TEST_CASE("register: inserts into cache and populates cold contexts") {
  ContextManager mgr = make_manager();
  Session session;
  session.session_id = "s1";
  mgr.register_space(session, tiny_conditional_space());
  CHECK(mgr.cache().size() == 1);
  CHECK(session.active_app == "tiny_bank");
  auto limit = session.vector.get("daily_limit");
  REQUIRE(limit.has_value());
  CHECK(std::get<std::int64_t>(*limit) == 500);
  CHECK(session.vector.find("daily_limit")->update_count == 1);
}

TEST_CASE("register: refuses spaces with lint errors") {
  ContextManager mgr = make_manager();
  Session session;
  ContextSpace broken = tiny_conditional_space();
  (*broken.functions)[1].policies["send_to_specified_recipient"].rules[0].constraint = "@@@";
  CHECK_THROWS_AS(mgr.register_space(session, broken), ContextManagerError);
  CHECK(mgr.cache().size() == 0);
}

TEST_CASE("cache: capacity 2 evicts the least recently used") {
  ContextManager mgr = make_manager(2);
  Session session;
  mgr.register_space(session, named_space("a"));
  mgr.register_space(session, named_space("b"));
  mgr.register_space(session, named_space("c"));
  CHECK(mgr.cache().size() == 2);
  CHECK(!mgr.cache().contains("a"));
  CHECK(mgr.cache().contains("b"));
  CHECK(mgr.cache().contains("c"));
  CHECK(mgr.cache().eviction_log() == std::vector<std::string>{"a"});
}

TEST_CASE("cache: re-register is not a load, just a recency bump") {
  ContextManager mgr = make_manager(2);
  Session session;
  mgr.register_space(session, named_space("a"));
  mgr.register_space(session, named_space("b"));
  CHECK(mgr.load_count() == 2);
  mgr.register_space(session, named_space("a"));  // cached: no load
  CHECK(mgr.load_count() == 2);
  CHECK(mgr.cache().recency_order() == std::vector<std::string>{"a", "b"});
  mgr.register_space(session, named_space("c"));  // evicts b, not a
  CHECK(!mgr.cache().contains("b"));
  CHECK(mgr.cache().contains("a"));
}

TEST_CASE("switch_app: hit activates without load, miss reports back") {
  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, named_space("a"));
  mgr.register_space(session, named_space("b"));
  auto loads = mgr.load_count();
  CHECK(mgr.switch_app(session, "a"));
  CHECK(mgr.load_count() == loads);
  CHECK(session.active_app == "a");
  CHECK(!mgr.switch_app(session, "zz"));
  CHECK(session.active_app == "a");  // unchanged on miss
}

TEST_CASE("switch_app: alternating within capacity causes no evictions") {
  ContextManager mgr = make_manager(2);
  Session session;
  mgr.register_space(session, named_space("a"));
  mgr.register_space(session, named_space("b"));
  for (int i = 0; i < 10; ++i) {
    CHECK(mgr.switch_app(session, i % 2 == 0 ? "a" : "b"));
  }
  CHECK(mgr.cache().eviction_log().empty());
}

TEST_CASE("cache: exhaustive LRU equivalence, strings of length <= 6 over 3 apps, capacity 2") {
  const std::vector<std::string> apps = {"a", "b", "c"};
  for (int len = 1; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<std::string> accesses;
      int c = code;
      for (int i = 0; i < len; ++i) {
        accesses.push_back(apps[static_cast<std::size_t>(c % 3)]);
        c /= 3;
      }
      ContextManager mgr = make_manager(2);
      Session session;
      for (const auto& app : accesses)
        if (!mgr.switch_app(session, app)) mgr.register_space(session, named_space(app));
      auto expected = oracle::lru_simulate(2, {}, accesses);
      CAPTURE(accesses);
      CHECK(mgr.cache().recency_order() == expected.order);
      CHECK(mgr.cache().eviction_log() == expected.evictions);
    }
  }
}

TEST_CASE("cache: pinned apps are never evicted") {
  ContextManager mgr = make_manager(2, {"pinned_app"});
  Session session;
  mgr.register_space(session, named_space("pinned_app"));
  mgr.register_space(session, named_space("b"));
  mgr.register_space(session, named_space("c"));  // b is LRU-unpinned, goes first
  CHECK(mgr.cache().contains("pinned_app"));
  CHECK(!mgr.cache().contains("b"));
  mgr.register_space(session, named_space("d"));
  CHECK(mgr.cache().contains("pinned_app"));
  CHECK(mgr.cache().eviction_log() == std::vector<std::string>{"b", "c"});
}

TEST_CASE("refresh: touches exactly the matching temperature class") {
  // 5 cold / 3 warm / 2 hot contexts.
  ContextSpace s = minimal_space();
  s.app_id = "temps";
  auto add = [&](const std::string& id, Temperature t) {
    ContextMetadata m;
    m.ctx_id = id;
    m.type = ValueType::integer;
    m.src = Source::func_params;
    m.tempr = t;
    s.contexts.emplace(id, std::move(m));
  };
  for (int i = 0; i < 5; ++i) add("cold_" + std::to_string(i), Temperature::cold);
  for (int i = 0; i < 3; ++i) add("warm_" + std::to_string(i), Temperature::warm);
  for (int i = 0; i < 2; ++i) add("hot_" + std::to_string(i), Temperature::hot);

  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, s);  // load refreshes everything once

  CHECK(mgr.refresh(session, UpdateTrigger::pre_validation) == 2);
  CHECK(mgr.refresh(session, UpdateTrigger::instruction) == 3);
  CHECK(mgr.refresh(session, UpdateTrigger::load) == 10);

  CHECK(session.vector.find("cold_0")->update_count == 2);   // load + load
  CHECK(session.vector.find("warm_0")->update_count == 3);   // load + instruction + load
  CHECK(session.vector.find("hot_0")->update_count == 3);    // load + pre_validation + load
  CHECK(session.vector.find("hot_0")->last_trigger == "load");
}

TEST_CASE("scripted session: 1 load, 4 instructions, 9 validations") {
  ContextSpace s = tiny_conditional_space();
  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, s);
  for (int i = 0; i < 4; ++i) mgr.begin_instruction(session, "send 10 to alice");
  for (int i = 0; i < 9; ++i) mgr.refresh(session, UpdateTrigger::pre_validation);

  for (const auto& [id, entry] : session.vector) {
    CAPTURE(id);
    switch (entry.metadata.tempr) {
      case Temperature::cold: CHECK(entry.update_count == 1); break;
      case Temperature::warm: CHECK(entry.update_count == 5); break;
      case Temperature::hot: CHECK(entry.update_count == 10); break;
    }
  }
}

TEST_CASE("refresh: unavailable acquisition leaves the value unset") {
  ContextSpace s = tiny_conditional_space();
  ContextMetadata m;
  m.ctx_id = "missing_key";
  m.type = ValueType::string;
  m.src = Source::system_api;
  m.tempr = Temperature::cold;
  m.acquisition = "no.such.key";
  s.contexts.emplace("missing_key", std::move(m));
  // Reference it so lint stays clean.
  (*s.functions)[1]
      .policies["send_to_specified_recipient"]
      .rules.push_back({"missing_key", "missing_key == \"x\"", "unused"});

  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, s);
  CHECK(!session.vector.get("missing_key").has_value());
  CHECK(session.vector.find("missing_key")->update_count == 1);
}

TEST_CASE("ingest: user_request contexts only, with type guards") {
  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, tiny_conditional_space());
  mgr.begin_instruction(session, "send 10 to alice");

  ExtractionResult result;
  result.param_values.emplace("user_specified_recipients", Value{StringList{"alice"}});
  result.param_values.emplace("daily_limit", Value{std::int64_t{99999}});  // system_api: rejected
  std::vector<std::string> warnings;
  mgr.ingest_extraction(session, result, &warnings);

  CHECK(session.vector.get("user_specified_recipients").has_value());
  CHECK(std::get<std::int64_t>(*session.vector.get("daily_limit")) == 500);  // untouched
  CHECK(warnings.size() == 1);
  CHECK(session.extraction.latest.has_value());
}

TEST_CASE("ingest: degraded result still completes the barrier state") {
  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, tiny_conditional_space());
  mgr.begin_instruction(session, "anything");
  ExtractionResult degraded;
  degraded.degraded = true;
  mgr.ingest_extraction(session, degraded);
  CHECK(session.extraction.latest.has_value());
  CHECK(session.extraction.ingested_generation == session.extraction.generation);
}

TEST_CASE("new instruction clears stale instruction-derived values") {
  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, tiny_conditional_space());
  mgr.begin_instruction(session, "send 10 to alice");
  ExtractionResult result;
  result.param_values.emplace("user_specified_recipients", Value{StringList{"alice"}});
  mgr.ingest_extraction(session, result);
  CHECK(session.vector.get("user_specified_recipients").has_value());

  mgr.begin_instruction(session, "list files");
  CHECK(!session.vector.get("user_specified_recipients").has_value());
  CHECK(session.extraction.generation == 2);
}

TEST_CASE("record_action: parameters, history contexts, history list") {
  ContextSpace s = tiny_conditional_space();
  ContextMetadata hist;
  hist.ctx_id = "executed_functions";
  hist.type = ValueType::string_list;
  hist.src = Source::agent_history;
  hist.tempr = Temperature::hot;
  s.contexts.emplace("executed_functions", hist);
  (*s.functions)[1]
      .policies["send_to_specified_recipient"]
      .rules.push_back({"executed_functions", "executed_functions contains \"check_balance\"",
                        "check the balance first"});

  ContextManager mgr = make_manager();
  Session session;
  mgr.register_space(session, s);

  mgr.record_action(session, "check_balance", nlohmann::json::object(), "ok");
  mgr.record_action(session, "transfer_money", {{"amount", 25}, {"recipient", "alice"},
                                                {"unknown_param", 1}},
                    "ok");

  CHECK(session.history.size() == 2);
  CHECK(std::get<std::int64_t>(*session.vector.get("amount")) == 25);
  CHECK(std::get<std::string>(*session.vector.get("recipient")) == "alice");
  CHECK(std::get<StringList>(*session.vector.get("executed_functions")) ==
        StringList{"check_balance", "transfer_money"});
  CHECK(session.executed_function_ids() ==
        std::vector<std::string>{"check_balance", "transfer_money"});
}
