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

#include "ctxguard/toolchain.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ctxguard/constraint.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

FunctionDoc FunctionDoc::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ToolchainError("function doc must be an object");
  FunctionDoc d;
  d.name = j.value("name", "");
  if (d.name.empty()) throw ToolchainError("function doc needs a name");
  d.description = j.value("description", "");
  if (auto it = j.find("parameters"); it != j.end() && it->is_array()) {
    for (const auto& p : *it) {
      ParameterDoc pd;
      pd.name = p.value("name", "");
      pd.type = p.value("type", "string");
      pd.description = p.value("description", "");
      d.parameters.push_back(std::move(pd));
    }
  }
  return d;
}

nlohmann::json FunctionDoc::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : parameters)
    params.push_back({{"name", p.name}, {"type", p.type}, {"description", p.description}});
  return {{"name", name}, {"description", description}, {"parameters", std::move(params)}};
}

std::vector<FunctionDoc> load_function_docs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ToolchainError("cannot open docs file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw ToolchainError("docs file must be a JSON array: " + path);
  std::vector<FunctionDoc> out;
  std::set<std::string> names;
  for (const auto& e : doc) {
    FunctionDoc d = FunctionDoc::from_json(e);
    if (!names.insert(d.name).second)
      throw ToolchainError("duplicate function doc '" + d.name + "'");
    out.push_back(std::move(d));
  }
  return out;
}

HandlerManifest HandlerManifest::from_json(const nlohmann::json& j) {
  const nlohmann::json* arr = &j;
  if (j.is_object() && j.contains("entries")) arr = &j["entries"];
  if (!arr->is_array()) throw ToolchainError("manifest must be a JSON array of entries");
  HandlerManifest m;
  for (const auto& e : *arr) {
    HandlerEntry entry;
    entry.binding.package = e.value("package", "");
    entry.binding.widget_class = e.value("class", "");
    entry.binding.resource_id = e.value("resource_id", "");
    if (entry.binding.resource_id.empty())
      throw ToolchainError("manifest entry needs a resource_id");
    entry.handler = e.value("handler", "");
    entry.excerpt = e.value("excerpt", "");
    if (auto it = e.find("callees"); it != e.end() && it->is_array())
      for (const auto& c : *it)
        if (c.is_string()) entry.callees.push_back(c.get<std::string>());
    m.entries.push_back(std::move(entry));
  }
  return m;
}

nlohmann::json HandlerManifest::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json o;
    if (!e.binding.package.empty()) o["package"] = e.binding.package;
    if (!e.binding.widget_class.empty()) o["class"] = e.binding.widget_class;
    o["resource_id"] = e.binding.resource_id;
    o["handler"] = e.handler;
    if (!e.excerpt.empty()) o["excerpt"] = e.excerpt;
    o["callees"] = e.callees;
    arr.push_back(std::move(o));
  }
  return {{"entries", std::move(arr)}};
}

HandlerManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ToolchainError("cannot open manifest file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ToolchainError("manifest file is malformed JSON: " + path);
  return HandlerManifest::from_json(doc);
}

ChangeLog ChangeLog::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ToolchainError("changelog must be a JSON object");
  ChangeLog c;
  if (auto it = j.find("added"); it != j.end() && it->is_array())
    for (const auto& e : *it) c.added.push_back(FunctionDoc::from_json(e));
  if (auto it = j.find("modified"); it != j.end() && it->is_array())
    for (const auto& e : *it) c.modified.push_back(FunctionDoc::from_json(e));
  if (auto it = j.find("removed"); it != j.end() && it->is_array())
    for (const auto& e : *it)
      if (e.is_string()) c.removed.push_back(e.get<std::string>());
  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second)
      throw ToolchainError("changelog lists '" + id + "' more than once");
  };
  for (const auto& d : c.added) claim(d.name);
  for (const auto& d : c.modified) claim(d.name);
  for (const auto& id : c.removed) claim(id);
  return c;
}

ChangeLog load_changelog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ToolchainError("cannot open changelog file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ToolchainError("changelog file is malformed JSON: " + path);
  return ChangeLog::from_json(doc);
}

// ---------------------------------------------------------------------------
// Stub reasoning provider
// ---------------------------------------------------------------------------

StubReasoningProvider::StubReasoningProvider(nlohmann::json canned)
    : canned_(canned.is_object() ? std::move(canned) : nlohmann::json::object()) {}

StubReasoningProvider StubReasoningProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ToolchainError("cannot open canned provider file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ToolchainError("canned provider file is malformed JSON");
  return StubReasoningProvider(std::move(doc));
}

namespace {

bool contains_any(const std::string& text, std::initializer_list<const char*> needles) {
  for (const char* n : needles)
    if (text.find(n) != std::string::npos) return true;
  return false;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

nlohmann::json heuristic_classify(const nlohmann::json& input) {
  auto fn = input.value("function", nlohmann::json::object());
  std::string all = lowercase(fn.value("name", "")) + " " + lowercase(fn.value("description", ""));
  if (contains_any(all, {"reset", "wipe", "format", "erase", "destroy", "shutdown"}))
    return {{"sec_level", "dangerous"}};
  if (contains_any(all, {"send", "transfer", "delete", "write", "set", "pay", "unlock", "lock",
                         "post", "upload", "install", "remove", "share", "modify"}))
    return {{"sec_level", "conditional"}};
  return {{"sec_level", "normal"}};
}

nlohmann::json heuristic_predict(const nlohmann::json& input) {
  auto fn = input.value("function", nlohmann::json::object());
  std::string name = fn.value("name", "function");
  std::string desc = fn.value("description", "");
  return {{"intents",
           {{{"intent_id", "requested_" + name},
             {"description", desc},
             {"param_contexts", nlohmann::json::array()}}}}};
}

nlohmann::json heuristic_generate(const nlohmann::json& input) {
  auto fn = input.value("function", nlohmann::json::object());
  std::string name = fn.value("name", "function");
  std::string ctx = name + "_requested";
  return {{"rules",
           {{{"ctx_id", ctx},
             {"constraint", ctx + " == true"},
             {"guidance", "The user must explicitly request this action."}}}},
          {"contexts",
           {{{"ctx_id", ctx}, {"type", "boolean"}, {"src", "user_request"}}}}};
}

}  // namespace

nlohmann::json StubReasoningProvider::reason(const std::string& stage,
                                             const nlohmann::json& input) {
  std::string name;
  if (input.is_object()) {
    if (input.contains("function") && input["function"].is_object())
      name = input["function"].value("name", "");
    else if (input.contains("file") && input["file"].is_object())
      name = input["file"].value("name", "");
  }
  std::string key = stage + ":" + name;
  if (stage == "generate_policy" && input.is_object())
    key += ":" + input.value("intent", nlohmann::json::object()).value("intent_id", "");
  if (auto it = canned_.find(key); it != canned_.end()) return *it;

  if (stage == "classify") return heuristic_classify(input);
  if (stage == "predict_intents") return heuristic_predict(input);
  if (stage == "generate_policy") return heuristic_generate(input);
  if (stage == "identify_handlers") return {{"handlers", nlohmann::json::array()}};
  if (stage == "suggestion_rationale") return {{"rationale", ""}};
  return nlohmann::json::object();
}

// ---------------------------------------------------------------------------
// Generation stages
// ---------------------------------------------------------------------------

SecurityLevel classify(const FunctionDoc& doc, ReasoningProvider& provider,
                       const ToolchainOptions& opts) {
  nlohmann::json input = {{"function", doc.to_json()},
                          {"schema", {{"sec_level", "normal|conditional|dangerous"}}}};
  std::string last_error = "no response";
  for (int attempt = 0; attempt <= opts.provider_retries; ++attempt) {
    nlohmann::json out = provider.reason("classify", input);
    if (out.is_object() && out.contains("sec_level") && out["sec_level"].is_string()) {
      if (auto level = security_level_from_string(out["sec_level"].get<std::string>()))
        return *level;
    }
    last_error = "schema-invalid classify response";
  }
  throw ToolchainError("classify('" + doc.name + "') exhausted retries: " + last_error);
}

std::vector<IntentEntry> predict_intents(const FunctionDoc& doc, ReasoningProvider& provider,
                                         const ToolchainOptions& opts,
                                         std::optional<SecurityLevel> known_level) {
  SecurityLevel level = known_level ? *known_level : classify(doc, provider, opts);
  if (level != SecurityLevel::conditional)
    throw ToolchainError("predict_intents('" + doc.name + "'): function is not conditional");
  if (doc.description.empty())
    throw ToolchainError("predict_intents('" + doc.name + "'): description is empty");

  nlohmann::json input = {{"function", doc.to_json()},
                          {"schema", {{"intents", "[{intent_id, description, param_contexts}]"}}}};
  for (int attempt = 0; attempt <= opts.provider_retries; ++attempt) {
    nlohmann::json out = provider.reason("predict_intents", input);
    auto it = out.find("intents");
    if (it == out.end() || !it->is_array() || it->empty()) continue;
    std::vector<IntentEntry> intents;
    bool ok = true;
    for (const auto& e : *it) {
      IntentEntry entry;
      entry.intent_id = e.value("intent_id", "");
      entry.description = e.value("description", "");
      if (entry.intent_id.empty() || entry.description.empty()) {
        ok = false;
        break;
      }
      if (auto pc = e.find("param_contexts"); pc != e.end() && pc->is_array())
        for (const auto& p : *pc)
          if (p.is_string()) entry.param_contexts.push_back(p.get<std::string>());
      intents.push_back(std::move(entry));
    }
    if (!ok) continue;
    IntentEntry fallback;
    fallback.intent_id = "fallback";
    fallback.is_fallback = true;
    intents.push_back(std::move(fallback));
    return intents;
  }
  throw ToolchainError("predict_intents('" + doc.name + "') exhausted retries");
}

namespace {

Temperature default_temperature(Source src) {
  switch (src) {
    case Source::user_request: return Temperature::warm;
    case Source::func_params: return Temperature::hot;
    case Source::agent_history: return Temperature::hot;
    case Source::system_api: return Temperature::cold;
    case Source::system_cli: return Temperature::cold;
  }
  return Temperature::warm;
}

}  // namespace

std::pair<Policy, std::vector<ContextMetadata>> generate_policy(const FunctionDoc& doc,
                                                                const IntentEntry& intent,
                                                                ReasoningProvider& provider,
                                                                const ToolchainOptions& opts) {
  nlohmann::json input = {
      {"function", doc.to_json()},
      {"intent", {{"intent_id", intent.intent_id}, {"description", intent.description}}},
      {"schema",
       {{"rules", "[{ctx_id, constraint, guidance}]"},
        {"contexts", "[{ctx_id, type, src, tempr?, acquisition?}]"}}}};

  std::string last_error = "no response";
  for (int attempt = 0; attempt <= opts.provider_retries; ++attempt) {
    nlohmann::json out = provider.reason("generate_policy", input);
    if (!out.is_object() || !out.contains("rules") || !out["rules"].is_array() ||
        !out.contains("contexts") || !out["contexts"].is_array()) {
      last_error = "schema-invalid generate_policy response";
      continue;
    }

    std::vector<ContextMetadata> metadata;
    std::map<std::string, ContextMetadata> table;
    bool ok = true;
    for (const auto& c : out["contexts"]) {
      ContextMetadata m;
      m.ctx_id = c.value("ctx_id", "");
      auto type = value_type_from_name(c.value("type", ""));
      auto src = source_from_string(c.value("src", ""));
      if (m.ctx_id.empty() || !type || !src) {
        last_error = "context metadata entry is malformed";
        ok = false;
        break;
      }
      m.type = *type;
      m.src = *src;
      if (c.contains("tempr")) {
        auto tempr = temperature_from_string(c.value("tempr", ""));
        if (!tempr) {
          last_error = "unknown temperature in metadata";
          ok = false;
          break;
        }
        m.tempr = *tempr;
      } else {
        m.tempr = default_temperature(m.src);
      }
      m.acquisition = c.value("acquisition", "");
      table[m.ctx_id] = m;
      metadata.push_back(std::move(m));
    }
    if (!ok) continue;

    Policy policy;
    for (const auto& r : out["rules"]) {
      Rule rule;
      rule.ctx_id = r.value("ctx_id", "");
      rule.constraint = r.value("constraint", "");
      rule.guidance = r.value("guidance", "");
      if (rule.ctx_id.empty() || rule.guidance.empty()) {
        last_error = "rule entry is malformed";
        ok = false;
        break;
      }
      try {
        ConstraintAst ast = parse_constraint(rule.constraint);
        if (ast.lhs.ctx_id != rule.ctx_id) {
          last_error = "rule subject differs from its ctx_id";
          ok = false;
          break;
        }
        if (!table.count(rule.ctx_id) ||
            (ast.rhs.is_ref() && !table.count(ast.rhs.ref().ctx_id))) {
          last_error = "policy references an undeclared context";
          ok = false;
          break;
        }
        typecheck(ast, table);
      } catch (const std::exception& e) {
        last_error = e.what();
        ok = false;
        break;
      }
      policy.rules.push_back(std::move(rule));
    }
    if (!ok || policy.rules.empty()) {
      if (ok) last_error = "policy has no rules";
      continue;
    }
    return {std::move(policy), std::move(metadata)};
  }
  throw ToolchainError("generate_policy('" + doc.name + "'/'" + intent.intent_id +
                       "') exhausted retries: " + last_error);
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

void merge_metadata(ContextSpace& space, const std::vector<ContextMetadata>& metadata) {
  for (const auto& m : metadata) {
    // First declaration wins; later policies typecheck against it via lint.
    if (!space.contexts.count(m.ctx_id)) space.contexts.emplace(m.ctx_id, m);
  }
}

FunctionEntry build_function(const FunctionDoc& doc, ReasoningProvider& provider,
                             const ToolchainOptions& opts, ContextSpace& space) {
  FunctionEntry fn;
  fn.function_id = doc.name;
  fn.desc = doc.description;
  fn.sec_level = classify(doc, provider, opts);
  if (fn.sec_level != SecurityLevel::conditional) return fn;

  fn.intents = predict_intents(doc, provider, opts, fn.sec_level);
  for (const auto& intent : fn.intents) {
    if (intent.is_fallback) continue;
    auto [policy, metadata] = generate_policy(doc, intent, provider, opts);
    merge_metadata(space, metadata);
    fn.policies.emplace(intent.intent_id, std::move(policy));
  }
  // Intent parameter contexts must be declared; default any stragglers to
  // instruction-extracted strings.
  for (auto& intent : fn.intents)
    for (const auto& ctx_id : intent.param_contexts)
      if (!space.contexts.count(ctx_id)) {
        ContextMetadata m;
        m.ctx_id = ctx_id;
        m.type = ValueType::string;
        m.src = Source::user_request;
        m.tempr = Temperature::warm;
        space.contexts.emplace(ctx_id, std::move(m));
      }
  return fn;
}

}  // namespace

ContextSpace assemble_space(const std::string& app_id, const std::vector<FunctionDoc>& docs,
                            const std::optional<HandlerManifest>& manifest,
                            ReasoningProvider& provider, const ToolchainOptions& opts) {
  if (docs.empty() && (!manifest || manifest->entries.empty()))
    throw ToolchainError("assemble_space: no inputs");

  ContextSpace space;
  space.app_id = app_id;
  space.version = "1";
  space.functions.emplace();

  std::set<std::string> used_ids;
  auto unique_id = [&](std::string base) {
    std::string id = base;
    int n = 2;
    while (!used_ids.insert(id).second) id = base + "_" + std::to_string(n++);
    return id;
  };

  for (const auto& doc : docs) {
    FunctionDoc d = doc;
    d.name = unique_id(d.name);
    space.functions->push_back(build_function(d, provider, opts, space));
  }
  if (manifest) {
    for (const auto& entry : manifest->entries) {
      FunctionDoc d;
      d.name = unique_id(entry.handler.empty() ? entry.binding.resource_id : entry.handler);
      d.description = entry.excerpt;
      if (!entry.callees.empty()) {
        d.description += " Invokes:";
        for (const auto& c : entry.callees) d.description += " " + c;
        d.description += ".";
      }
      FunctionEntry fn = build_function(d, provider, opts, space);
      fn.gui_binding = entry.binding;
      space.functions->push_back(std::move(fn));
    }
  }

  for (int pass = 0; pass <= opts.regeneration_passes; ++pass) {
    auto findings = lint_space(space);
    if (lint_clean(findings)) return space;
    if (pass == opts.regeneration_passes) {
      std::string detail;
      for (const auto& f : findings)
        if (f.severity == Severity::error) {
          detail = f.path + ": " + f.message;
          break;
        }
      throw ToolchainError("assembled space still fails lint: " + detail);
    }
    // Regenerate the functions lint pointed at and try again.
    std::set<std::string> broken;
    for (const auto& f : findings) {
      if (f.severity != Severity::error) continue;
      auto pos = f.path.find("functions/");
      if (pos == std::string::npos) continue;
      std::string rest = f.path.substr(pos + 10);
      broken.insert(rest.substr(0, rest.find('/')));
    }
    for (auto& fn : *space.functions) {
      if (!broken.count(fn.function_id)) continue;
      FunctionDoc d;
      d.name = fn.function_id;
      d.description = fn.desc;
      auto binding = fn.gui_binding;
      fn = build_function(d, provider, opts, space);
      fn.gui_binding = binding;
    }
  }
  return space;
}

// ---------------------------------------------------------------------------
// GUI handler identification and call graphs
// ---------------------------------------------------------------------------

HandlerManifest identify_handlers(const std::vector<SourceFile>& sources,
                                  ReasoningProvider& provider, const ToolchainOptions& opts) {
  static const char* kGuiMarkers[] = {"onClick",          "setOnClickListener",
                                      "OnClickListener",  "android:onClick",
                                      "findViewById",     "setOnLongClickListener",
                                      "addActionListener", "Button",
                                      "onItemSelected"};
  HandlerManifest manifest;
  for (const auto& file : sources) {
    bool gui_related = false;
    for (const char* marker : kGuiMarkers)
      if (file.content.find(marker) != std::string::npos) {
        gui_related = true;
        break;
      }
    if (!gui_related) continue;

    nlohmann::json input = {
        {"file", {{"name", file.name}, {"content", file.content}}},
        {"schema", {{"handlers", "[{package, class, resource_id, handler, excerpt}]"}}}};
    bool got = false;
    for (int attempt = 0; attempt <= opts.provider_retries && !got; ++attempt) {
      nlohmann::json out = provider.reason("identify_handlers", input);
      auto it = out.find("handlers");
      if (it == out.end() || !it->is_array()) continue;
      got = true;
      for (const auto& h : *it) {
        HandlerEntry entry;
        entry.binding.package = h.value("package", "");
        entry.binding.widget_class = h.value("class", "");
        entry.binding.resource_id = h.value("resource_id", "");
        entry.handler = h.value("handler", "");
        entry.excerpt = h.value("excerpt", "");
        if (entry.binding.resource_id.empty()) continue;
        manifest.entries.push_back(std::move(entry));
      }
    }
    if (!got) throw ToolchainError("identify_handlers('" + file.name + "') exhausted retries");
  }
  return manifest;
}

FileCallGraphProvider::FileCallGraphProvider(const nlohmann::json& edges) {
  if (!edges.is_array()) throw ToolchainError("call-graph edges must be a JSON array");
  for (const auto& e : edges) {
    std::string caller, callee;
    if (e.is_array() && e.size() == 2 && e[0].is_string() && e[1].is_string()) {
      caller = e[0].get<std::string>();
      callee = e[1].get<std::string>();
    } else if (e.is_object()) {
      caller = e.value("caller", "");
      callee = e.value("callee", "");
    }
    if (!caller.empty() && !callee.empty()) edges_[caller].push_back(callee);
  }
}

FileCallGraphProvider FileCallGraphProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ToolchainError("cannot open edges file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ToolchainError("edges file is malformed JSON");
  return FileCallGraphProvider(doc);
}

std::vector<std::string> FileCallGraphProvider::direct_callees(const std::string& function) {
  auto it = edges_.find(function);
  return it == edges_.end() ? std::vector<std::string>{} : it->second;
}

HandlerManifest attach_call_graphs(const HandlerManifest& manifest, CallGraphProvider& graph,
                                   std::vector<std::string>* warnings) {
  HandlerManifest out = manifest;
  for (auto& entry : out.entries) {
    // Breadth-first reachability from the handler; the visited set breaks
    // cycles and deduplicates.
    std::vector<std::string> frontier = graph.direct_callees(entry.handler);
    if (frontier.empty() && warnings)
      warnings->push_back("handler '" + entry.handler + "' has no call-graph edges");
    std::set<std::string> visited{entry.handler};
    std::vector<std::string> callees;
    std::size_t head = 0;
    while (head < frontier.size()) {
      std::string fn = frontier[head++];
      if (!visited.insert(fn).second) continue;
      callees.push_back(fn);
      for (const auto& next : graph.direct_callees(fn)) frontier.push_back(next);
    }
    entry.callees = std::move(callees);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

namespace {

std::set<std::string> referenced_contexts(const ContextSpace& space) {
  std::set<std::string> out;
  for (const FunctionEntry* f : space.all_functions()) {
    for (const auto& intent : f->intents)
      for (const auto& p : intent.param_contexts) out.insert(p);
    for (const auto& [intent_id, policy] : f->policies) {
      (void)intent_id;
      for (const auto& rule : policy.rules) {
        out.insert(rule.ctx_id);
        try {
          ConstraintAst ast = parse_constraint(rule.constraint);
          if (ast.rhs.is_ref()) out.insert(ast.rhs.ref().ctx_id);
        } catch (const ConstraintParseError&) {
        }
      }
    }
  }
  return out;
}

std::string bump_version(const std::string& version) {
  if (!version.empty() &&
      std::all_of(version.begin(), version.end(),
                  [](unsigned char c) { return std::isdigit(c); }))
    return std::to_string(std::stoll(version) + 1);
  throw ToolchainError("space version '" + version + "' is not numeric");
}

}  // namespace

ContextSpace evolve_from_changelog(const ContextSpace& space, const ChangeLog& changelog,
                                   ReasoningProvider& provider, const ToolchainOptions& opts) {
  ContextSpace out = space;
  if (!out.functions)
    throw ToolchainError("evolution currently supports flat (function-list) spaces");

  for (const auto& id : changelog.removed)
    if (!lookup_function(out, id)) throw ToolchainError("removed function '" + id + "' not found");
  for (const auto& doc : changelog.modified)
    if (!lookup_function(out, doc.name))
      throw ToolchainError("modified function '" + doc.name + "' not found");

  std::set<std::string> refs_before = referenced_contexts(out);

  auto drop = [&](const std::string& id) {
    auto& fns = *out.functions;
    fns.erase(std::remove_if(fns.begin(), fns.end(),
                             [&](const FunctionEntry& f) { return f.function_id == id; }),
              fns.end());
  };
  for (const auto& id : changelog.removed) drop(id);
  for (const auto& doc : changelog.modified) drop(doc.name);

  for (const auto& doc : changelog.modified)
    out.functions->push_back(build_function(doc, provider, opts, out));
  for (const auto& doc : changelog.added) {
    if (lookup_function(out, doc.name))
      throw ToolchainError("added function '" + doc.name + "' already exists");
    out.functions->push_back(build_function(doc, provider, opts, out));
  }

  // Garbage-collect the contexts orphaned by the edit: referenced before,
  // referenced by nothing anymore.
  std::set<std::string> refs_after = referenced_contexts(out);
  for (auto it = out.contexts.begin(); it != out.contexts.end();) {
    if (refs_before.count(it->first) && !refs_after.count(it->first))
      it = out.contexts.erase(it);
    else
      ++it;
  }

  out.version = bump_version(out.version);

  auto findings = lint_space(out);
  if (!lint_clean(findings)) {
    std::string detail;
    for (const auto& f : findings)
      if (f.severity == Severity::error) {
        detail = f.path + ": " + f.message;
        break;
      }
    throw ToolchainError("evolved space fails lint: " + detail);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runtime feedback analysis
// ---------------------------------------------------------------------------

const char* to_string(Suggestion::Kind k) {
  switch (k) {
    case Suggestion::Kind::add_intent: return "add_intent";
    case Suggestion::Kind::add_function: return "add_function";
    case Suggestion::Kind::review_rule: return "review_rule";
    case Suggestion::Kind::relax_rule: return "relax_rule";
    case Suggestion::Kind::tighten_rule: return "tighten_rule";
  }
  return "?";
}

nlohmann::json Suggestion::to_json() const {
  return {{"kind", to_string(kind)},
          {"target", target},
          {"evidence", evidence},
          {"rationale", rationale}};
}

std::vector<Suggestion> analyze_logs(const std::vector<ValidationEvent>& events, int threshold,
                                     ReasoningProvider* provider) {
  struct Bucket {
    Suggestion::Kind kind;
    std::vector<std::uint64_t> evidence;
    std::string stat;
    bool sole_failure = true;
  };
  std::map<std::string, Bucket> buckets;  // keyed by target path

  auto touch = [&](Suggestion::Kind kind, const std::string& target, std::uint64_t id,
                   const std::string& stat) -> Bucket& {
    auto [it, inserted] = buckets.try_emplace(target);
    Bucket& b = it->second;
    if (inserted) {
      b.kind = kind;
      b.stat = stat;
    }
    b.evidence.push_back(id);
    return b;
  };

  for (const auto& e : events) {
    if (e.verdict == "miss" && e.miss_kind) {
      if (*e.miss_kind == "unknown_function")
        touch(Suggestion::Kind::add_function, "functions/" + e.function_id, e.event_id,
              "retrieval misses for function '" + e.function_id + "'");
      else
        touch(Suggestion::Kind::add_intent, "functions/" + e.function_id + "/intents", e.event_id,
              "intent misses for function '" + e.function_id + "'");
      continue;
    }
    if (e.user_override && *e.user_override) {
      // A block the user allowed through: the failing rules are suspects.
      std::vector<const RuleOutcome*> failed;
      for (const auto& r : e.rule_outcomes)
        if (r.outcome == TriBool::no) failed.push_back(&r);
      for (const auto* r : failed) {
        std::string intent = e.intent_id ? *e.intent_id : "fallback";
        Bucket& b = touch(Suggestion::Kind::review_rule,
                          "functions/" + e.function_id + "/policies/" + intent + "/" + r->ctx_id,
                          e.event_id, "user overrides of rule '" + r->constraint + "'");
        if (failed.size() > 1) b.sole_failure = false;
      }
      continue;
    }
    if (e.user_reported && e.verdict == "allow") {
      std::string intent = e.intent_id ? *e.intent_id : "fallback";
      touch(Suggestion::Kind::tighten_rule, "functions/" + e.function_id + "/policies/" + intent,
            e.event_id, "user reports against allowed actions of '" + e.function_id + "'");
    }
  }

  std::vector<Suggestion> out;
  for (auto& [target, bucket] : buckets) {
    if (static_cast<int>(bucket.evidence.size()) < threshold) continue;
    Suggestion s;
    s.kind = bucket.kind;
    if (bucket.kind == Suggestion::Kind::review_rule && bucket.sole_failure)
      s.kind = Suggestion::Kind::relax_rule;
    s.target = target;
    s.evidence = bucket.evidence;
    s.rationale = std::to_string(bucket.evidence.size()) + " " + bucket.stat;
    if (provider) {
      nlohmann::json decorated = provider->reason(
          "suggestion_rationale",
          {{"kind", to_string(s.kind)}, {"target", s.target}, {"statistic", s.rationale}});
      std::string prose = decorated.value("rationale", "");
      if (!prose.empty()) s.rationale = prose;
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.target < b.target;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Canonical diff
// ---------------------------------------------------------------------------

namespace {

void diff_json(const nlohmann::json& a, const nlohmann::json& b, const std::string& path,
               std::vector<std::string>& out) {
  if (a == b) return;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) {
      (void)v;
      keys.insert(k);
    }
    for (const auto& [k, v] : b.items()) {
      (void)v;
      keys.insert(k);
    }
    for (const auto& k : keys) {
      std::string child = path.empty() ? k : path + "/" + k;
      if (a.contains(k) && b.contains(k))
        diff_json(a[k], b[k], child, out);
      else
        out.push_back(child);
    }
    return;
  }
  out.push_back(path);
}

// Function lists diff by id, not by position, so inserting or removing one
// entry does not implicate its neighbors.
nlohmann::json functions_by_id(const nlohmann::json& space) {
  nlohmann::json out = nlohmann::json::object();
  if (space.contains("functions"))
    for (const auto& f : space["functions"]) out[f.value("function_id", "?")] = f;
  return out;
}

}  // namespace

std::vector<std::string> diff_spaces(const ContextSpace& before, const ContextSpace& after) {
  nlohmann::json a = nlohmann::json::parse(serialize_space(before));
  nlohmann::json b = nlohmann::json::parse(serialize_space(after));
  std::vector<std::string> out;
  diff_json(a["app_id"], b["app_id"], "app_id", out);
  diff_json(a["version"], b["version"], "version", out);
  diff_json(a["contexts"], b["contexts"], "contexts", out);
  if (a.contains("functions") && b.contains("functions"))
    diff_json(functions_by_id(a), functions_by_id(b), "functions", out);
  else
    diff_json(a.value("classes", nlohmann::json::array()),
              b.value("classes", nlohmann::json::array()), "classes", out);
  return out;
}

}  // namespace ctxguard
