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

#include "support/space_gen.hpp"

#include <functional>

namespace ctxguard::testgen {

namespace {

ContextMetadata meta(std::string id, ValueType type, Source src, Temperature tempr,
                     std::string acquisition = "") {
  ContextMetadata m;
  m.ctx_id = std::move(id);
  m.type = type;
  m.src = src;
  m.tempr = tempr;
  m.acquisition = std::move(acquisition);
  return m;
}

Rule rule(std::string ctx, std::string constraint, std::string guidance) {
  return Rule{std::move(ctx), std::move(constraint), std::move(guidance)};
}

IntentEntry intent(std::string id, std::string desc, std::vector<std::string> params = {}) {
  IntentEntry e;
  e.intent_id = std::move(id);
  e.description = std::move(desc);
  e.param_contexts = std::move(params);
  return e;
}

IntentEntry fallback() {
  IntentEntry e;
  e.intent_id = "fallback";
  e.is_fallback = true;
  return e;
}

}  // namespace

ContextSpace minimal_space() {
  ContextSpace s;
  s.app_id = "minimal";
  s.version = "1";
  s.functions.emplace();
  FunctionEntry fn;
  fn.function_id = "get_time";
  fn.desc = "read the current time";
  fn.sec_level = SecurityLevel::normal;
  s.functions->push_back(std::move(fn));
  return s;
}

ContextSpace tiny_conditional_space() {
  ContextSpace s;
  s.app_id = "tiny_bank";
  s.version = "1";
  s.contexts.emplace("amount", meta("amount", ValueType::integer, Source::func_params,
                                    Temperature::hot));
  s.contexts.emplace("recipient", meta("recipient", ValueType::string, Source::func_params,
                                       Temperature::hot));
  s.contexts.emplace("user_specified_recipients",
                     meta("user_specified_recipients", ValueType::string_list,
                          Source::user_request, Temperature::warm));
  s.contexts.emplace("daily_limit", meta("daily_limit", ValueType::integer, Source::system_api,
                                         Temperature::cold, "bank.daily_limit"));
  s.functions.emplace();

  FunctionEntry balance;
  balance.function_id = "check_balance";
  balance.desc = "show the current account balance";
  balance.sec_level = SecurityLevel::normal;
  balance.intents.push_back(intent("view_balance", "check the current account balance"));
  s.functions->push_back(std::move(balance));

  FunctionEntry transfer;
  transfer.function_id = "transfer_money";
  transfer.desc = "move money out of the account";
  transfer.sec_level = SecurityLevel::conditional;
  transfer.intents.push_back(intent("send_to_specified_recipient",
                                    "send money to the recipient the user specified",
                                    {"user_specified_recipients"}));
  transfer.intents.push_back(fallback());
  Policy p;
  p.rules.push_back(rule("recipient", "recipient in user_specified_recipients",
                         "Only transfer to recipients the user named."));
  p.rules.push_back(rule("amount", "amount <= daily_limit", "Amount exceeds the daily limit."));
  transfer.policies.emplace("send_to_specified_recipient", std::move(p));
  s.functions->push_back(std::move(transfer));

  FunctionEntry close;
  close.function_id = "close_account";
  close.desc = "permanently close the account";
  close.sec_level = SecurityLevel::dangerous;
  s.functions->push_back(std::move(close));
  return s;
}

ContextSpace synthetic_rule_space(int n_rules) {
  ContextSpace s;
  s.app_id = "synthetic_rules";
  s.version = "1";
  s.functions.emplace();

  FunctionEntry fn;
  fn.function_id = "run_batch_job";
  fn.desc = "run the nightly batch job";
  fn.sec_level = SecurityLevel::conditional;
  fn.intents.push_back(intent("run_batch", "run the batch job"));
  fn.intents.push_back(fallback());
  Policy p;
  for (int i = 1; i <= n_rules; ++i) {
    std::string ctx = "c" + std::to_string(i);
    s.contexts.emplace(ctx, meta(ctx, ValueType::boolean, Source::func_params, Temperature::hot));
    p.rules.push_back(rule(ctx, ctx + " == true", "condition " + ctx + " must hold"));
  }
  fn.policies.emplace("run_batch", std::move(p));
  s.functions->push_back(std::move(fn));
  return s;
}

ContextSpace paper_scale_space(int functions, int contexts) {
  const int n_dangerous = 10;
  const int n_conditional = functions > 60 ? 95 : functions / 2;
  const int n_normal = functions - n_conditional - n_dangerous;

  ContextSpace s;
  s.app_id = "desk_scale";
  s.version = "1";
  s.functions.emplace();

  struct Shared {
    const char* id;
    ValueType type;
    Source src;
    Temperature tempr;
    const char* acq;
  };
  const Shared shared[] = {
      {"user_specified_limit", ValueType::integer, Source::user_request, Temperature::warm, ""},
      {"user_specified_items", ValueType::string_list, Source::user_request, Temperature::warm,
       ""},
      {"device_locale", ValueType::string, Source::system_api, Temperature::cold, "sys.locale"},
      {"battery_level", ValueType::integer, Source::system_api, Temperature::hot, "sys.battery"},
      {"network_online", ValueType::boolean, Source::system_api, Temperature::warm,
       "sys.network"},
      {"work_hours", ValueType::boolean, Source::system_api, Temperature::cold, "sys.work_hours"},
      {"executed_functions", ValueType::string_list, Source::agent_history, Temperature::hot, ""},
      {"last_function", ValueType::string, Source::agent_history, Temperature::hot, ""},
      {"action_count", ValueType::integer, Source::agent_history, Temperature::hot, ""},
      {"user_confirmed_scope", ValueType::boolean, Source::user_request, Temperature::warm, ""},
  };
  for (const auto& c : shared) s.contexts.emplace(c.id, meta(c.id, c.type, c.src, c.tempr, c.acq));

  // Rules that pull the shared contexts into the first few policies.
  const std::pair<const char*, const char*> shared_rules[] = {
      {"device_locale", "device_locale == \"en_US\""},
      {"battery_level", "battery_level >= 10"},
      {"network_online", "network_online == true"},
      {"work_hours", "work_hours == true"},
      {"executed_functions", "executed_functions contains \"init\""},
      {"last_function", "last_function != \"wipe_store_0\""},
      {"action_count", "action_count <= 100"},
      {"user_confirmed_scope", "user_confirmed_scope == true"},
      {"user_specified_items", "user_specified_items subset_of [\"a\", \"b\", \"c\"]"},
  };

  int remaining_private = contexts - static_cast<int>(std::size(shared));
  int flags = remaining_private - 2 * n_conditional;  // conditional fns with a third context

  for (int i = 0; i < n_normal; ++i) {
    FunctionEntry fn;
    fn.function_id = "get_status_" + std::to_string(i);
    fn.desc = "read status metric " + std::to_string(i);
    fn.sec_level = SecurityLevel::normal;
    s.functions->push_back(std::move(fn));
  }

  for (int i = 0; i < n_conditional; ++i) {
    std::string idx = std::to_string(i);
    std::string arg = "arg_" + idx;
    std::string limit = "limit_" + idx;
    s.contexts.emplace(arg, meta(arg, ValueType::integer, Source::func_params, Temperature::hot));
    s.contexts.emplace(limit, meta(limit, ValueType::integer, Source::system_api,
                                   Temperature::cold, "gen.limit"));

    FunctionEntry fn;
    fn.function_id = "update_record_" + idx;
    fn.desc = "update stored record group " + idx;
    fn.sec_level = SecurityLevel::conditional;
    std::vector<std::string> params;
    if (i % 4 == 0) params.push_back("user_specified_limit");
    if (i % 7 == 0) params.push_back("user_specified_items");
    fn.intents.push_back(
        intent("update_" + idx, "update or modify the record group " + idx, params));
    fn.intents.push_back(fallback());

    Policy p;
    p.rules.push_back(rule(arg, arg + " >= 0", "Record index must not be negative."));
    p.rules.push_back(rule(arg, arg + " <= " + limit, "Record index exceeds the group limit."));
    if (i < flags) {
      std::string flag = "flag_" + idx;
      s.contexts.emplace(flag,
                         meta(flag, ValueType::boolean, Source::user_request, Temperature::warm));
      p.rules.push_back(rule(flag, flag + " == true", "The user must opt in for this group."));
    }
    if (i < static_cast<int>(std::size(shared_rules)))
      p.rules.push_back(rule(shared_rules[i].first, shared_rules[i].second,
                             "Shared device condition not met."));
    fn.policies.emplace("update_" + idx, std::move(p));
    s.functions->push_back(std::move(fn));
  }

  for (int i = 0; i < n_dangerous; ++i) {
    FunctionEntry fn;
    fn.function_id = "wipe_store_" + std::to_string(i);
    fn.desc = "erase data store " + std::to_string(i);
    fn.sec_level = SecurityLevel::dangerous;
    s.functions->push_back(std::move(fn));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Random GUI trees
// ---------------------------------------------------------------------------

namespace {

struct Box {
  int l, t, r, b;
};

void fill_children(std::mt19937& rng, GuiNode& parent, Box box, int depth, int& budget,
                   int& next_index) {
  if (budget <= 0 || depth >= 4) return;
  std::uniform_int_distribution<int> n_children(1, 3);
  int n = n_children(rng);
  // Partition the box horizontally or vertically into non-overlapping strips.
  bool horizontal = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  int span = horizontal ? box.r - box.l : box.b - box.t;
  if (span < n * 20) n = 1;
  int cursor = horizontal ? box.l : box.t;
  for (int i = 0; i < n && budget > 0; ++i) {
    int remaining = (horizontal ? box.r : box.b) - cursor;
    int slots = n - i;
    int width = remaining / slots;
    if (width < 10) break;
    Box child_box = horizontal ? Box{cursor, box.t, cursor + width, box.b}
                               : Box{box.l, cursor, box.r, cursor + width};
    cursor += width;

    GuiNode child;
    child.doc_index = next_index++;
    child.left = child_box.l;
    child.top = child_box.t;
    child.right = child_box.r;
    child.bottom = child_box.b;
    child.package = "com.example.app";
    --budget;
    bool leaf = depth >= 3 || std::uniform_int_distribution<int>(0, 2)(rng) != 0;
    if (leaf) {
      child.clickable = std::uniform_int_distribution<int>(0, 9)(rng) < 6;
      child.widget_class = child.clickable ? "android.widget.Button" : "android.widget.TextView";
      child.resource_id = "el_" + std::to_string(child.doc_index);
    } else {
      child.widget_class = "android.widget.FrameLayout";
      child.clickable = std::uniform_int_distribution<int>(0, 9)(rng) < 2;
      if (child.clickable) child.resource_id = "panel_" + std::to_string(child.doc_index);
      fill_children(rng, child, child_box, depth + 1, budget, next_index);
    }
    parent.children.push_back(std::move(child));
  }
}

}  // namespace

GuiTree random_tree(std::mt19937& rng, int max_nodes, int width, int height) {
  GuiTree tree;
  GuiNode root;
  root.doc_index = 0;
  root.left = 0;
  root.top = 0;
  root.right = width;
  root.bottom = height;
  root.package = "com.example.app";
  root.widget_class = "android.widget.FrameLayout";
  int budget = max_nodes - 1;
  int next_index = 1;
  fill_children(rng, root, {0, 0, width, height}, 0, budget, next_index);
  tree.roots.push_back(std::move(root));
  tree.node_count = next_index;
  return tree;
}

}  // namespace ctxguard::testgen
