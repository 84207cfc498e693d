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

#include "ctxguard/space.hpp"

#include <algorithm>
#include <set>

#include "ctxguard/constraint.hpp"

namespace ctxguard {

std::string to_string(SecurityLevel v) {
  switch (v) {
    case SecurityLevel::normal: return "normal";
    case SecurityLevel::conditional: return "conditional";
    case SecurityLevel::dangerous: return "dangerous";
  }
  return "?";
}

std::string to_string(Source v) {
  switch (v) {
    case Source::user_request: return "user_request";
    case Source::system_api: return "system_api";
    case Source::system_cli: return "system_cli";
    case Source::func_params: return "func_params";
    case Source::agent_history: return "agent_history";
  }
  return "?";
}

std::string to_string(Temperature v) {
  switch (v) {
    case Temperature::cold: return "cold";
    case Temperature::warm: return "warm";
    case Temperature::hot: return "hot";
  }
  return "?";
}

std::optional<SecurityLevel> security_level_from_string(std::string_view s) {
  if (s == "normal") return SecurityLevel::normal;
  if (s == "conditional") return SecurityLevel::conditional;
  if (s == "dangerous") return SecurityLevel::dangerous;
  return std::nullopt;
}

std::optional<Source> source_from_string(std::string_view s) {
  if (s == "user_request") return Source::user_request;
  if (s == "system_api") return Source::system_api;
  if (s == "system_cli") return Source::system_cli;
  if (s == "func_params") return Source::func_params;
  if (s == "agent_history") return Source::agent_history;
  return std::nullopt;
}

std::optional<Temperature> temperature_from_string(std::string_view s) {
  if (s == "cold") return Temperature::cold;
  if (s == "warm") return Temperature::warm;
  if (s == "hot") return Temperature::hot;
  return std::nullopt;
}

const IntentEntry* FunctionEntry::find_intent(std::string_view intent_id) const {
  for (const auto& i : intents)
    if (i.intent_id == intent_id) return &i;
  return nullptr;
}

const IntentEntry* FunctionEntry::fallback_intent() const {
  for (const auto& i : intents)
    if (i.is_fallback) return &i;
  return nullptr;
}

std::vector<const FunctionEntry*> ContextSpace::all_functions() const {
  std::vector<const FunctionEntry*> out;
  if (classes) {
    for (const auto& c : *classes)
      for (const auto& f : c.functions) out.push_back(&f);
  } else if (functions) {
    for (const auto& f : *functions) out.push_back(&f);
  }
  return out;
}

const ContextMetadata* ContextSpace::find_context(std::string_view ctx_id) const {
  auto it = contexts.find(std::string(ctx_id));
  return it == contexts.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// ContextVector
// ---------------------------------------------------------------------------

ContextVector::ContextVector(const ContextSpace& space) {
  for (const auto& [id, meta] : space.contexts) {
    ContextEntry e;
    e.ctx_id = id;
    e.metadata = meta;
    entries_.emplace(id, std::move(e));
  }
}

bool ContextVector::has(std::string_view ctx_id) const {
  return entries_.count(std::string(ctx_id)) > 0;
}

const ContextEntry* ContextVector::find(std::string_view ctx_id) const {
  auto it = entries_.find(std::string(ctx_id));
  return it == entries_.end() ? nullptr : &it->second;
}

ContextEntry* ContextVector::find(std::string_view ctx_id) {
  auto it = entries_.find(std::string(ctx_id));
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Value> ContextVector::get(std::string_view ctx_id) const {
  const ContextEntry* e = find(ctx_id);
  if (!e) return std::nullopt;
  return e->value;
}

ContextVector::SetStatus ContextVector::set(const std::string& ctx_id, Value v) {
  ContextEntry* e = find(ctx_id);
  if (!e) return SetStatus::unknown_context;
  if (value_type(v) != e->metadata.type) return SetStatus::type_mismatch;
  e->value = std::move(v);
  return SetStatus::ok;
}

ContextVector::SetStatus ContextVector::set_from_json(const std::string& ctx_id,
                                                      const nlohmann::json& j) {
  ContextEntry* e = find(ctx_id);
  if (!e) return SetStatus::unknown_context;
  auto v = value_from_json(j, e->metadata.type, /*coerce=*/true);
  if (!v) return SetStatus::type_mismatch;
  e->value = std::move(*v);
  return SetStatus::ok;
}

void ContextVector::unset(const std::string& ctx_id) {
  if (ContextEntry* e = find(ctx_id)) e->value.reset();
}

ContextVector init_vector(const ContextSpace& space) { return ContextVector(space); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path, msg);
}

std::string require_string(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

ContextMetadata parse_metadata(const std::string& ctx_id, const json& j,
                               const std::string& path) {
  if (!j.is_object()) fail(path, "context metadata must be an object");
  ContextMetadata m;
  m.ctx_id = ctx_id;
  std::string type_s = require_string(j, path, "type");
  auto type = value_type_from_name(type_s);
  if (!type) fail(path + ".type", "unknown value type '" + type_s + "'");
  m.type = *type;
  std::string src_s = require_string(j, path, "src");
  auto src = source_from_string(src_s);
  if (!src) fail(path + ".src", "unknown source '" + src_s + "'");
  m.src = *src;
  std::string tempr_s = require_string(j, path, "tempr");
  auto tempr = temperature_from_string(tempr_s);
  if (!tempr) fail(path + ".tempr", "unknown temperature '" + tempr_s + "'");
  m.tempr = *tempr;
  m.acquisition = optional_string(j, "acquisition");
  return m;
}

IntentEntry parse_intent(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "intent must be an object");
  IntentEntry e;
  e.intent_id = require_string(j, path, "intent_id");
  if (e.intent_id.empty()) fail(path + ".intent_id", "must be non-empty");
  if (auto it = j.find("description"); it != j.end()) {
    if (!it->is_string()) fail(path + ".description", "expected a string");
    e.description = it->get<std::string>();
  }
  if (auto it = j.find("is_fallback"); it != j.end()) {
    if (!it->is_boolean()) fail(path + ".is_fallback", "expected a boolean");
    e.is_fallback = it->get<bool>();
  }
  if (auto it = j.find("param_contexts"); it != j.end()) {
    if (!it->is_array()) fail(path + ".param_contexts", "expected an array");
    for (const auto& p : *it) {
      if (!p.is_string()) fail(path + ".param_contexts", "entries must be strings");
      e.param_contexts.push_back(p.get<std::string>());
    }
  }
  return e;
}

Rule parse_rule(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "rule must be an object");
  Rule r;
  r.ctx_id = require_string(j, path, "ctx_id");
  r.constraint = require_string(j, path, "constraint");
  r.guidance = require_string(j, path, "guidance");
  return r;
}

FunctionEntry parse_function(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "function entry must be an object");
  FunctionEntry f;
  f.function_id = require_string(j, path, "function_id");
  if (f.function_id.empty()) fail(path + ".function_id", "must be non-empty");
  f.desc = optional_string(j, "desc");
  std::string level_s = require_string(j, path, "sec_level");
  auto level = security_level_from_string(level_s);
  if (!level) fail(path + ".sec_level", "unknown security level '" + level_s + "'");
  f.sec_level = *level;

  if (auto it = j.find("intents"); it != j.end()) {
    if (!it->is_array()) fail(path + ".intents", "expected an array");
    std::size_t i = 0;
    for (const auto& e : *it)
      f.intents.push_back(parse_intent(e, path + ".intents[" + std::to_string(i++) + "]"));
  }
  if (auto it = j.find("policies"); it != j.end()) {
    if (!it->is_object()) fail(path + ".policies", "expected an object");
    for (const auto& [intent_id, rules] : it->items()) {
      std::string ppath = path + ".policies." + intent_id;
      if (!rules.is_array()) fail(ppath, "policy must be an array of rules");
      Policy p;
      std::size_t i = 0;
      for (const auto& r : rules)
        p.rules.push_back(parse_rule(r, ppath + "[" + std::to_string(i++) + "]"));
      f.policies.emplace(intent_id, std::move(p));
    }
  }
  if (auto it = j.find("gui_binding"); it != j.end()) {
    std::string bpath = path + ".gui_binding";
    if (!it->is_object()) fail(bpath, "expected an object");
    GuiBinding b;
    b.package = optional_string(*it, "package");
    b.widget_class = optional_string(*it, "class");
    b.resource_id = require_string(*it, bpath, "resource_id");
    if (b.resource_id.empty()) fail(bpath + ".resource_id", "must be non-empty");
    f.gui_binding = std::move(b);
  }
  return f;
}

// Structural invariants shared by parse (hard errors) and lint (findings).
void validate_space(const ContextSpace& space) {
  std::set<std::string> seen_fn;
  auto check_function = [&](const FunctionEntry& f, const std::string& path) {
    if (!seen_fn.insert(f.function_id).second)
      fail(path, "duplicate function_id '" + f.function_id + "'");

    int fallbacks = 0;
    std::set<std::string> intent_ids;
    for (std::size_t i = 0; i < f.intents.size(); ++i) {
      const auto& intent = f.intents[i];
      std::string ipath = path + ".intents[" + std::to_string(i) + "]";
      if (!intent_ids.insert(intent.intent_id).second)
        fail(ipath, "duplicate intent_id '" + intent.intent_id + "'");
      if (intent.is_fallback && ++fallbacks > 1) fail(ipath, "more than one fallback intent");
      if (!intent.is_fallback && intent.description.empty())
        fail(ipath + ".description", "non-fallback intents need a description");
      for (const auto& p : intent.param_contexts)
        if (!space.find_context(p))
          fail(ipath + ".param_contexts", "undeclared context '" + p + "'");
    }
    for (const auto& [intent_id, policy] : f.policies) {
      std::string ppath = path + ".policies." + intent_id;
      if (!intent_ids.count(intent_id)) fail(ppath, "policy for undeclared intent");
      for (std::size_t i = 0; i < policy.rules.size(); ++i) {
        const Rule& r = policy.rules[i];
        std::string rpath = ppath + "[" + std::to_string(i) + "]";
        if (!space.find_context(r.ctx_id))
          fail(rpath + ".ctx_id", "undeclared context '" + r.ctx_id + "'");
        if (r.guidance.empty()) fail(rpath + ".guidance", "must be non-empty");
        ConstraintAst ast;
        try {
          ast = parse_constraint(r.constraint);
        } catch (const ConstraintParseError& e) {
          fail(rpath + ".constraint", e.what());
        }
        if (ast.lhs.ctx_id != r.ctx_id)
          fail(rpath + ".constraint",
               "constraint subject '" + ast.lhs.ctx_id + "' differs from rule ctx_id");
        if (ast.rhs.is_ref() && !space.find_context(ast.rhs.ref().ctx_id))
          fail(rpath + ".constraint", "undeclared context '" + ast.rhs.ref().ctx_id + "'");
      }
    }
    switch (f.sec_level) {
      case SecurityLevel::normal:
        if (!f.policies.empty()) fail(path, "normal functions carry no policies");
        break;
      case SecurityLevel::conditional: {
        bool has_policy_intent = false;
        for (const auto& intent : f.intents)
          if (f.policies.count(intent.intent_id)) has_policy_intent = true;
        if (!has_policy_intent)
          fail(path, "conditional functions need at least one intent with a policy");
        for (const auto& intent : f.intents)
          if (!intent.is_fallback && !f.policies.count(intent.intent_id))
            fail(path, "intent '" + intent.intent_id + "' has no policy");
        break;
      }
      case SecurityLevel::dangerous:
        break;  // may carry policies; lint downgrades that to a warning
    }
  };

  if (space.classes) {
    std::set<std::string> class_ids;
    for (std::size_t c = 0; c < space.classes->size(); ++c) {
      const auto& cls = (*space.classes)[c];
      std::string cpath = "classes[" + std::to_string(c) + "]";
      if (!class_ids.insert(cls.class_id).second)
        fail(cpath, "duplicate class_id '" + cls.class_id + "'");
      for (std::size_t i = 0; i < cls.functions.size(); ++i)
        check_function(cls.functions[i], cpath + ".functions[" + std::to_string(i) + "]");
    }
  } else if (space.functions) {
    for (std::size_t i = 0; i < space.functions->size(); ++i)
      check_function((*space.functions)[i], "functions[" + std::to_string(i) + "]");
  }
}

}  // namespace

ContextSpace parse_space(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) fail("", "malformed JSON");
  if (!doc.is_object()) fail("", "top level must be an object");

  ContextSpace space;
  space.app_id = require_string(doc, "", "app_id");
  space.version = require_string(doc, "", "version");

  bool has_classes = doc.contains("classes");
  bool has_functions = doc.contains("functions");
  if (has_classes == has_functions)
    fail("", "exactly one of 'classes' or 'functions' must be present");

  auto ctxs = doc.find("contexts");
  if (ctxs == doc.end() || !ctxs->is_object()) fail("contexts", "missing or not an object");
  for (const auto& [ctx_id, meta] : ctxs->items()) {
    if (ctx_id.empty()) fail("contexts", "empty ctx_id");
    space.contexts.emplace(ctx_id, parse_metadata(ctx_id, meta, "contexts." + ctx_id));
  }

  if (has_classes) {
    const auto& arr = doc["classes"];
    if (!arr.is_array()) fail("classes", "expected an array");
    std::vector<ClassEntry> classes;
    std::size_t c = 0;
    for (const auto& e : arr) {
      std::string cpath = "classes[" + std::to_string(c++) + "]";
      if (!e.is_object()) fail(cpath, "expected an object");
      ClassEntry cls;
      cls.class_id = require_string(e, cpath, "class_id");
      auto fns = e.find("functions");
      if (fns == e.end() || !fns->is_array()) fail(cpath + ".functions", "missing or not an array");
      std::size_t i = 0;
      for (const auto& f : *fns)
        cls.functions.push_back(parse_function(f, cpath + ".functions[" + std::to_string(i++) + "]"));
      classes.push_back(std::move(cls));
    }
    space.classes = std::move(classes);
  } else {
    const auto& arr = doc["functions"];
    if (!arr.is_array()) fail("functions", "expected an array");
    std::vector<FunctionEntry> functions;
    std::size_t i = 0;
    for (const auto& f : arr)
      functions.push_back(parse_function(f, "functions[" + std::to_string(i++) + "]"));
    space.functions = std::move(functions);
  }

  validate_space(space);
  return space;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

namespace {

json metadata_to_json(const ContextMetadata& m) {
  json j;
  j["type"] = value_type_name(m.type);
  j["src"] = to_string(m.src);
  j["tempr"] = to_string(m.tempr);
  if (!m.acquisition.empty()) j["acquisition"] = m.acquisition;
  return j;
}

json function_to_json(const FunctionEntry& f) {
  json j;
  j["function_id"] = f.function_id;
  if (!f.desc.empty()) j["desc"] = f.desc;
  j["sec_level"] = to_string(f.sec_level);
  if (!f.intents.empty()) {
    json intents = json::array();
    for (const auto& i : f.intents) {
      json e;
      e["intent_id"] = i.intent_id;
      if (!i.description.empty()) e["description"] = i.description;
      if (i.is_fallback) e["is_fallback"] = true;
      if (!i.param_contexts.empty()) e["param_contexts"] = i.param_contexts;
      intents.push_back(std::move(e));
    }
    j["intents"] = std::move(intents);
  }
  if (!f.policies.empty()) {
    json policies = json::object();
    for (const auto& [intent_id, policy] : f.policies) {
      json rules = json::array();
      for (const auto& r : policy.rules) {
        json e;
        e["ctx_id"] = r.ctx_id;
        e["constraint"] = r.constraint;
        e["guidance"] = r.guidance;
        rules.push_back(std::move(e));
      }
      policies[intent_id] = std::move(rules);
    }
    j["policies"] = std::move(policies);
  }
  if (f.gui_binding) {
    json b;
    if (!f.gui_binding->package.empty()) b["package"] = f.gui_binding->package;
    if (!f.gui_binding->widget_class.empty()) b["class"] = f.gui_binding->widget_class;
    b["resource_id"] = f.gui_binding->resource_id;
    j["gui_binding"] = std::move(b);
  }
  return j;
}

}  // namespace

std::string serialize_space(const ContextSpace& space) {
  json doc;
  doc["app_id"] = space.app_id;
  doc["version"] = space.version;
  json ctxs = json::object();
  for (const auto& [id, meta] : space.contexts) ctxs[id] = metadata_to_json(meta);
  doc["contexts"] = std::move(ctxs);
  if (space.classes) {
    json classes = json::array();
    for (const auto& c : *space.classes) {
      json e;
      e["class_id"] = c.class_id;
      json fns = json::array();
      for (const auto& f : c.functions) fns.push_back(function_to_json(f));
      e["functions"] = std::move(fns);
      classes.push_back(std::move(e));
    }
    doc["classes"] = std::move(classes);
  } else {
    json fns = json::array();
    if (space.functions)
      for (const auto& f : *space.functions) fns.push_back(function_to_json(f));
    doc["functions"] = std::move(fns);
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Lint
// ---------------------------------------------------------------------------

bool lint_clean(const std::vector<Finding>& findings) {
  return std::none_of(findings.begin(), findings.end(),
                      [](const Finding& f) { return f.severity == Severity::error; });
}

std::vector<Finding> lint_space(const ContextSpace& space) noexcept {
  std::vector<Finding> out;
  auto err = [&](std::string code, std::string path, std::string msg) {
    out.push_back({Severity::error, std::move(code), std::move(path), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string path, std::string msg) {
    out.push_back({Severity::warning, std::move(code), std::move(path), std::move(msg)});
  };

  try {
    std::set<std::string> referenced;
    std::map<std::string, std::vector<std::string>> binding_owners;
    std::set<std::string> seen_fn;

    auto visit_function = [&](const FunctionEntry& f, const std::string& path) {
      if (!seen_fn.insert(f.function_id).second)
        err("duplicate_function", path, "duplicate function_id '" + f.function_id + "'");

      int fallbacks = 0;
      for (const auto& intent : f.intents) {
        if (intent.is_fallback) ++fallbacks;
        for (const auto& p : intent.param_contexts) {
          referenced.insert(p);
          if (!space.find_context(p))
            err("dangling_context", path + "/intents/" + intent.intent_id,
                "param context '" + p + "' is not declared");
        }
        if (!intent.is_fallback && intent.description.empty())
          err("empty_description", path + "/intents/" + intent.intent_id,
              "non-fallback intent has no description");
      }
      if (fallbacks > 1)
        err("multiple_fallbacks", path, "function declares more than one fallback intent");

      for (const auto& [intent_id, policy] : f.policies) {
        std::string ppath = path + "/policies/" + intent_id;
        if (!f.find_intent(intent_id))
          err("policy_unknown_intent", ppath, "policy attached to undeclared intent");
        for (std::size_t i = 0; i < policy.rules.size(); ++i) {
          const Rule& r = policy.rules[i];
          std::string rpath = ppath + "/" + std::to_string(i);
          referenced.insert(r.ctx_id);
          if (!space.find_context(r.ctx_id))
            err("dangling_context", rpath, "rule context '" + r.ctx_id + "' is not declared");
          if (r.guidance.empty()) warn("empty_guidance", rpath, "rule has no guidance text");
          try {
            ConstraintAst ast = parse_constraint(r.constraint);
            if (ast.rhs.is_ref()) {
              referenced.insert(ast.rhs.ref().ctx_id);
              if (!space.find_context(ast.rhs.ref().ctx_id)) {
                err("dangling_context", rpath,
                    "constraint references undeclared context '" + ast.rhs.ref().ctx_id + "'");
                continue;
              }
            }
            if (space.find_context(ast.lhs.ctx_id)) {
              try {
                typecheck(ast, space.contexts);
              } catch (const ConstraintTypeError& e) {
                err("constraint_type", rpath, e.what());
              }
            }
          } catch (const ConstraintParseError& e) {
            err("constraint_parse", rpath, e.what());
          }
        }
      }

      switch (f.sec_level) {
        case SecurityLevel::normal:
          if (!f.policies.empty())
            err("normal_with_policies", path, "normal functions must not carry policies");
          break;
        case SecurityLevel::conditional: {
          if (f.intents.empty()) {
            err("missing_intents", path, "conditional function declares no intents");
            break;
          }
          bool only_fallback = true;
          bool any_policy = false;
          for (const auto& intent : f.intents) {
            if (f.policies.count(intent.intent_id)) any_policy = true;
            if (intent.is_fallback) continue;
            only_fallback = false;
            if (!f.policies.count(intent.intent_id))
              err("intent_without_policy", path + "/intents/" + intent.intent_id,
                  "non-fallback intent has no policy");
          }
          if (!any_policy)
            err("no_policy_intent", path,
                "conditional function needs at least one intent with a policy");
          if (only_fallback)
            warn("fallback_only", path, "conditional function has only a fallback intent");
          break;
        }
        case SecurityLevel::dangerous:
          if (!f.policies.empty())
            warn("dangerous_with_policies", path,
                 "policies on dangerous functions are ignored in favor of confirmation");
          break;
      }

      if (f.gui_binding) {
        if (f.gui_binding->resource_id.empty()) {
          err("empty_resource_id", path + "/gui_binding", "resource_id must be non-empty");
        } else {
          std::string key = f.gui_binding->package + "\x1f" + f.gui_binding->widget_class +
                            "\x1f" + f.gui_binding->resource_id;
          binding_owners[key].push_back(f.function_id);
        }
      }
    };

    bool has_classes = space.classes.has_value();
    bool has_functions = space.functions.has_value();
    if (has_classes == has_functions)
      err("structure", "", "exactly one of 'classes' or 'functions' must be populated");
    if (space.classes)
      for (const auto& c : *space.classes)
        for (const auto& f : c.functions)
          visit_function(f, "classes/" + c.class_id + "/functions/" + f.function_id);
    if (space.functions)
      for (const auto& f : *space.functions) visit_function(f, "functions/" + f.function_id);

    for (const auto& [key, owners] : binding_owners) {
      if (owners.size() > 1) {
        std::string joined;
        for (const auto& o : owners) joined += (joined.empty() ? "" : ", ") + o;
        err("duplicate_gui_binding", "functions/" + owners[1],
            "GUI binding shared by: " + joined);
      }
    }
    for (const auto& [id, meta] : space.contexts) {
      (void)meta;
      if (!referenced.count(id))
        warn("unreferenced_context", "contexts/" + id,
             "context is declared but never referenced");
    }
  } catch (...) {
    // lint is total by contract; a defect here must not take the caller down
    out.push_back({Severity::error, "lint_internal", "", "internal lint failure"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lookup
// ---------------------------------------------------------------------------

const FunctionEntry* lookup_function(const ContextSpace& space, std::string_view function_id) {
  for (const FunctionEntry* f : space.all_functions())
    if (f->function_id == function_id) return f;
  return nullptr;
}

const FunctionEntry* lookup_function(const ContextSpace& space, std::string_view class_id,
                                     std::string_view function_id) {
  if (!space.classes) return nullptr;
  for (const auto& c : *space.classes) {
    if (c.class_id != class_id) continue;
    for (const auto& f : c.functions)
      if (f.function_id == function_id) return &f;
  }
  return nullptr;
}

const FunctionEntry* lookup_function_by_gui(const ContextSpace& space, std::string_view package,
                                            std::string_view widget_class,
                                            std::string_view resource_id) {
  const FunctionEntry* best = nullptr;
  int best_rank = -1;
  for (const FunctionEntry* f : space.all_functions()) {
    if (!f->gui_binding) continue;
    const GuiBinding& b = *f->gui_binding;
    if (b.resource_id != resource_id) continue;
    if (!b.package.empty() && b.package != package) continue;
    if (!b.widget_class.empty() && b.widget_class != widget_class) continue;
    // Class-specific bindings take precedence over class wildcards.
    int rank = (b.widget_class.empty() ? 0 : 2) + (b.package.empty() ? 0 : 1);
    if (rank > best_rank) {
      best = f;
      best_rank = rank;
    }
  }
  return best;
}

}  // namespace ctxguard
