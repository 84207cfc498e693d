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

#include "ctxguard/runtime.hpp"
#include "support/oracles.hpp"
#include "support/space_gen.hpp"

using namespace ctxguard;
using namespace ctxguard::testgen;

namespace {

GuardRuntime make_runtime(RuntimeConfig config = {}) {
  return GuardRuntime(std::move(config), fixture_acquisition({{"bank.daily_limit", 500}}),
                      std::make_shared<KeywordExtractor>(),
                      std::make_shared<HashedBagEmbedder>());
}

ActionPayload direct(const std::string& fn, nlohmann::json params = nlohmann::json::object()) {
  ActionPayload a;
  a.mode = ActionPayload::Mode::direct;
  a.function_id = fn;
  a.params = std::move(params);
  return a;
}

}  // namespace

TEST_CASE("retrieve: declared pair, unknown function, fallback without policy") {
  ContextSpace s = tiny_conditional_space();
  RefinedIntent matched{RefinedIntent::Kind::intent, "send_to_specified_recipient"};
  RetrieveResult r = retrieve(s, "transfer_money", matched);
  REQUIRE(r.policy != nullptr);
  CHECK(!r.miss);

  r = retrieve(s, "ghost", matched);
  REQUIRE(r.miss.has_value());
  CHECK(*r.miss == MissKind::unknown_function);

  RefinedIntent fallback{RefinedIntent::Kind::fallback, "fallback"};
  r = retrieve(s, "transfer_money", fallback);  // fallback intent has no policy
  REQUIRE(r.miss.has_value());
  CHECK(*r.miss == MissKind::unknown_intent);

  RefinedIntent unrelated{RefinedIntent::Kind::unrelated, ""};
  r = retrieve(s, "transfer_money", unrelated);
  REQUIRE(r.miss.has_value());
  CHECK(*r.miss == MissKind::unrelated_instruction);
}

TEST_CASE("retrieve: fallback with a declared policy resolves to it") {
  ContextSpace s = tiny_conditional_space();
  Policy strict;
  strict.rules.push_back({"recipient", "recipient in user_specified_recipients", "named only"});
  (*s.functions)[1].policies.emplace("fallback", strict);
  RetrieveResult r = retrieve(s, "transfer_money", {RefinedIntent::Kind::fallback, "fallback"});
  REQUIRE(r.policy != nullptr);
  CHECK(r.policy->rules.size() == 1);
}

TEST_CASE("validate: security levels") {
  ContextSpace s = tiny_conditional_space();
  ContextVector cv = init_vector(s);
  const FunctionEntry* normal = lookup_function(s, "check_balance");
  const FunctionEntry* dangerous = lookup_function(s, "close_account");

  Decision d = validate(*normal, nullptr, cv, UnknownRouting::block);
  CHECK(d.verdict == Verdict::allow);

  d = validate(*dangerous, nullptr, cv, UnknownRouting::block);
  CHECK(d.verdict == Verdict::confirm);
}

TEST_CASE("validate: conditional rule outcomes") {
  ContextSpace s = tiny_conditional_space();
  const FunctionEntry* transfer = lookup_function(s, "transfer_money");
  const Policy* policy = &transfer->policies.at("send_to_specified_recipient");
  ContextVector cv = init_vector(s);
  cv.set("daily_limit", Value{std::int64_t{500}});
  cv.set("user_specified_recipients", Value{StringList{"alice"}});

  SUBCASE("all rules true -> allow") {
    cv.set("recipient", Value{std::string{"alice"}});
    cv.set("amount", Value{std::int64_t{300}});
    Decision d = validate(*transfer, policy, cv, UnknownRouting::block);
    CHECK(d.verdict == Verdict::allow);
    CHECK(d.failed.empty());
    CHECK(d.unknowns.empty());
  }
  SUBCASE("single failure blocks with that rule's guidance only") {
    cv.set("recipient", Value{std::string{"alice"}});
    cv.set("amount", Value{std::int64_t{900}});
    Decision d = validate(*transfer, policy, cv, UnknownRouting::block);
    CHECK(d.verdict == Verdict::block);
    REQUIRE(d.failed.size() == 1);
    CHECK(d.failed[0].ctx_id == "amount");
    CHECK(d.guidance == std::vector<std::string>{"Amount exceeds the daily limit."});
  }
  SUBCASE("unset context routes by configuration") {
    cv.set("amount", Value{std::int64_t{300}});
    cv.unset("recipient");
    Decision d = validate(*transfer, policy, cv, UnknownRouting::block);
    CHECK(d.verdict == Verdict::block);
    CHECK(d.unknowns == std::vector<std::string>{"recipient"});

    d = validate(*transfer, policy, cv, UnknownRouting::confirm);
    CHECK(d.verdict == Verdict::confirm);
  }
  SUBCASE("failure dominates unknown") {
    cv.set("amount", Value{std::int64_t{900}});
    cv.unset("recipient");
    Decision d = validate(*transfer, policy, cv, UnknownRouting::confirm);
    CHECK(d.verdict == Verdict::block);
  }
}

TEST_CASE("decide: benign end-to-end flow allows and logs") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "send 200 to alice");
  Decision d = rt.pre_action(session, direct("transfer_money",
                                             {{"recipient", "alice"}, {"amount", 200}}));
  CHECK(d.verdict == Verdict::allow);
  CHECK(d.event_id != 0);

  auto events = rt.events().snapshot();
  REQUIRE(events.size() == 1);
  CHECK(events[0].function_id == "transfer_money");
  CHECK(events[0].verdict == "allow");
  CHECK(events[0].instruction == "send 200 to alice");
  REQUIRE(events[0].intent_id.has_value());
  CHECK(*events[0].intent_id == "send_to_specified_recipient");
  CHECK(events[0].rule_outcomes.size() == 2);
  CHECK(events[0].referenced_contexts.count("amount"));
}

TEST_CASE("decide: constraint violation blocks with guidance") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "send 200 to alice");
  Decision d = rt.pre_action(session, direct("transfer_money",
                                             {{"recipient", "eve"}, {"amount", 200}}));
  CHECK(d.verdict == Verdict::block);
  REQUIRE(!d.failed.empty());
  CHECK(d.failed[0].ctx_id == "recipient");
}

TEST_CASE("decide: instruction/action mismatch misses or blocks") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "check my balance");
  // transfer_money has a fallback intent but no fallback policy: miss.
  Decision d = rt.pre_action(session, direct("transfer_money",
                                             {{"recipient", "eve"}, {"amount", 10}}));
  CHECK(d.verdict == Verdict::miss);
  auto events = rt.events().snapshot();
  REQUIRE(!events.empty());
  CHECK(events.back().miss_kind.has_value());
}

TEST_CASE("decide: unknown function misses") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "do something");
  Decision d = rt.pre_action(session, direct("no_such_function"));
  CHECK(d.verdict == Verdict::miss);
}

TEST_CASE("decide: errors before any instruction or registration") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  CHECK_THROWS_AS(rt.pre_action(session, direct("f")), RuntimeError);
  rt.register_app(session, tiny_conditional_space());
  CHECK_THROWS_AS(rt.pre_action(session, direct("f")), RuntimeError);  // no instruction yet
  rt.instruction(session, "check my balance");
  CHECK_NOTHROW(rt.pre_action(session, direct("check_balance")));
}

TEST_CASE("decide: every call appends exactly one event") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "send 5 to alice then check my balance");
  rt.pre_action(session, direct("check_balance"));
  rt.pre_action(session, direct("transfer_money", {{"recipient", "alice"}, {"amount", 5}}));
  rt.pre_action(session, direct("ghost"));
  rt.pre_action(session, direct("close_account"));
  CHECK(rt.events().snapshot().size() == 4);
}

TEST_CASE("on_confirm: dangerous confirm, block override, unknown event") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "close my account");

  Decision confirm = rt.pre_action(session, direct("close_account"));
  REQUIRE(confirm.verdict == Verdict::confirm);
  Decision resolved = rt.confirm(session, confirm.event_id, true);
  CHECK(resolved.verdict == Verdict::allow);
  {
    auto events = rt.events().snapshot();
    REQUIRE(events[0].user_override.has_value());
    CHECK(*events[0].user_override == false);  // confirming a dangerous fn is the expected flow
  }

  rt.instruction(session, "send 9000 to alice");
  Decision blocked = rt.pre_action(session, direct("transfer_money",
                                                   {{"recipient", "alice"}, {"amount", 9000}}));
  REQUIRE(blocked.verdict == Verdict::block);
  Decision overridden = rt.confirm(session, blocked.event_id, true);
  CHECK(overridden.verdict == Verdict::allow);
  {
    auto events = rt.events().snapshot();
    REQUIRE(events[1].user_override.has_value());
    CHECK(*events[1].user_override == true);  // override is a policy-evolution signal
  }

  CHECK_THROWS_AS(rt.confirm(session, 424242, true), RuntimeError);
  // Denied confirm stays blocked.
  rt.instruction(session, "close my account");
  Decision confirm2 = rt.pre_action(session, direct("close_account"));
  Decision denied = rt.confirm(session, confirm2.event_id, false);
  CHECK(denied.verdict == Verdict::block);
}

TEST_CASE("order check: advisory annotates, blocking blocks") {
  // Predicted sequence comes from the stub: both functions matched in
  // instruction order.
  ContextSpace s = tiny_conditional_space();
  RuntimeConfig advisory;
  advisory.order_check = OrderCheckMode::advisory;
  {
    GuardRuntime rt = make_runtime(advisory);
    Session& session = rt.open_session("t1");
    rt.register_app(session, s);
    rt.instruction(session, "check my balance then send 50 to alice");
    // transfer before check_balance: prediction is [check_balance, transfer_money]
    Decision d = rt.pre_action(session, direct("transfer_money",
                                               {{"recipient", "alice"}, {"amount", 50}}));
    CHECK(d.verdict == Verdict::allow);  // advisory only
    bool noted = false;
    for (const auto& g : d.guidance)
      if (g.find("order violation") != std::string::npos) noted = true;
    CHECK(noted);
  }
  RuntimeConfig blocking;
  blocking.order_check = OrderCheckMode::blocking;
  {
    GuardRuntime rt = make_runtime(blocking);
    Session& session = rt.open_session("t1");
    rt.register_app(session, s);
    rt.instruction(session, "check my balance then send 50 to alice");
    Decision d = rt.pre_action(session, direct("transfer_money",
                                               {{"recipient", "alice"}, {"amount", 50}}));
    CHECK(d.verdict == Verdict::block);
    // In order: allowed.
    Decision ok = rt.pre_action(session, direct("check_balance"));
    CHECK(ok.verdict == Verdict::allow);
    rt.post_action(session, "check_balance", nlohmann::json::object(), "ok");
    Decision then = rt.pre_action(session, direct("transfer_money",
                                                  {{"recipient", "alice"}, {"amount", 50}}));
    CHECK(then.verdict == Verdict::allow);
  }
}

TEST_CASE("report: flags the event for evolution analysis") {
  GuardRuntime rt = make_runtime();
  Session& session = rt.open_session("t1");
  rt.register_app(session, tiny_conditional_space());
  rt.instruction(session, "check my balance");
  Decision d = rt.pre_action(session, direct("check_balance"));
  rt.report(session, d.event_id, "should not have been allowed");
  auto events = rt.events().snapshot();
  CHECK(events[0].user_reported);
  CHECK(events[0].report_note == "should not have been allowed");
  CHECK_THROWS_AS(rt.report(session, 987654, "x"), RuntimeError);
}

TEST_CASE("cross-session isolation: context values never leak") {
  GuardRuntime rt = make_runtime();
  Session& a = rt.open_session("a");
  Session& b = rt.open_session("b");
  rt.register_app(a, tiny_conditional_space());
  rt.register_app(b, tiny_conditional_space());
  rt.instruction(a, "send 200 to alice");
  rt.instruction(b, "send 200 to bob");
  rt.pre_action(a, direct("transfer_money", {{"recipient", "alice"}, {"amount", 200}}));
  CHECK(std::get<StringList>(*a.vector.get("user_specified_recipients")) == StringList{"alice"});
  CHECK(std::get<StringList>(*b.vector.get("user_specified_recipients")) == StringList{"bob"});
  CHECK(!b.vector.get("recipient").has_value());
  // Confirmations are session-scoped.
  rt.instruction(a, "close my account");
  Decision confirm = rt.pre_action(a, direct("close_account"));
  CHECK_THROWS_AS(rt.confirm(b, confirm.event_id, true), RuntimeError);
}

TEST_CASE("event log: persisted NDJSON collapses updates by id") {
  std::string path = "/tmp/ctxguard_test_events_" + std::to_string(::getpid()) + ".ndjson";
  std::remove(path.c_str());
  {
    RuntimeConfig config;
    config.event_log_path = path;
    GuardRuntime rt = make_runtime(config);
    Session& session = rt.open_session("t1");
    rt.register_app(session, tiny_conditional_space());
    rt.instruction(session, "close my account");
    Decision d = rt.pre_action(session, direct("close_account"));
    rt.confirm(session, d.event_id, true);  // rewrites event 1
  }
  auto events = load_event_log(path);
  REQUIRE(events.size() == 1);
  CHECK(events[0].verdict == "allow");
  std::remove(path.c_str());
}
