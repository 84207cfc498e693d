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

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ctxguard/harness.hpp"
#include "ctxguard/service.hpp"
#include "ctxguard/toolchain.hpp"

namespace fs = std::filesystem;
using namespace ctxguard;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << content;
}

std::unique_ptr<ReasoningProvider> make_provider(const std::string& spec,
                                                 const std::string& canned_path) {
  if (spec == "stub") {
    if (!canned_path.empty())
      return std::make_unique<StubReasoningProvider>(StubReasoningProvider::from_file(canned_path));
    return std::make_unique<StubReasoningProvider>();
  }
  return make_http_reasoning_provider(spec);
}

int cmd_lint(const std::string& space_path) {
  ContextSpace space;
  try {
    space = parse_space(read_file(space_path));
  } catch (const SchemaError& e) {
    std::cout << "error  schema  " << e.what() << "\n";
    return 1;
  }
  auto findings = lint_space(space);
  for (const auto& f : findings)
    std::cout << (f.severity == Severity::error ? "error  " : "warning") << "  " << f.code << "  "
              << f.path << ": " << f.message << "\n";
  if (!lint_clean(findings)) return 1;
  std::cout << "ok: " << space.app_id << " (" << space.all_functions().size() << " functions, "
            << space.contexts.size() << " contexts)\n";
  return 0;
}

int cmd_inspect(const std::string& space_path, const std::string& function_id) {
  ContextSpace space = parse_space(read_file(space_path));
  if (!function_id.empty()) {
    const FunctionEntry* fn = lookup_function(space, function_id);
    if (!fn) {
      std::cerr << "no such function: " << function_id << "\n";
      return 1;
    }
    std::cout << fn->function_id << "  [" << to_string(fn->sec_level) << "]\n";
    if (!fn->desc.empty()) std::cout << "  " << fn->desc << "\n";
    if (fn->gui_binding)
      std::cout << "  gui: " << fn->gui_binding->package << " / " << fn->gui_binding->widget_class
                << " / " << fn->gui_binding->resource_id << "\n";
    for (const auto& intent : fn->intents) {
      std::cout << "  intent " << intent.intent_id << (intent.is_fallback ? " (fallback)" : "")
                << ": " << intent.description << "\n";
      auto it = fn->policies.find(intent.intent_id);
      if (it == fn->policies.end()) continue;
      for (const auto& rule : it->second.rules)
        std::cout << "    rule " << rule.constraint << "  -- " << rule.guidance << "\n";
    }
    return 0;
  }
  std::cout << "app: " << space.app_id << "  version: " << space.version << "\n";
  std::cout << "contexts: " << space.contexts.size() << "\n";
  for (const FunctionEntry* fn : space.all_functions()) {
    std::size_t rules = 0;
    for (const auto& [id, p] : fn->policies) {
      (void)id;
      rules += p.rules.size();
    }
    std::cout << "  " << fn->function_id << "  [" << to_string(fn->sec_level) << "]  intents="
              << fn->intents.size() << " rules=" << rules << "\n";
  }
  return 0;
}

int cmd_gen(const std::string& app, const std::string& docs_path, const std::string& manifest_path,
            const std::string& provider_spec, const std::string& canned, const std::string& edges,
            const std::string& out_path) {
  auto provider = make_provider(provider_spec, canned);
  std::vector<FunctionDoc> docs;
  if (!docs_path.empty()) docs = load_function_docs(docs_path);
  std::optional<HandlerManifest> manifest;
  if (!manifest_path.empty()) {
    manifest = load_manifest(manifest_path);
    if (!edges.empty()) {
      FileCallGraphProvider graph = FileCallGraphProvider::from_file(edges);
      std::vector<std::string> warnings;
      manifest = attach_call_graphs(*manifest, graph, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    }
  }
  ContextSpace space = assemble_space(app, docs, manifest, *provider);
  write_output(out_path, serialize_space(space));
  return 0;
}

int cmd_evolve(const std::string& space_path, const std::string& changelog_path,
               const std::string& logs_path, const std::string& provider_spec,
               const std::string& canned, int threshold, const std::string& out_path) {
  if (changelog_path.empty() == logs_path.empty())
    throw std::runtime_error("evolve needs exactly one of --changelog or --logs");
  if (!changelog_path.empty()) {
    ContextSpace space = parse_space(read_file(space_path));
    auto provider = make_provider(provider_spec, canned);
    ContextSpace evolved =
        evolve_from_changelog(space, load_changelog(changelog_path), *provider);
    write_output(out_path, serialize_space(evolved));
    return 0;
  }
  auto events = load_event_log(logs_path);
  auto suggestions = analyze_logs(events, threshold);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : suggestions) arr.push_back(s.to_json());
  write_output(out_path, arr.dump(2) + "\n");
  return 0;
}

int cmd_serve(const std::string& config_path) {
  ServiceConfig config = config_path.empty() ? ServiceConfig{} : ServiceConfig::load(config_path);
  GuardService service(config);
  service.start();
  std::cout << "listening on " << service.socket_path() << "\n";
  service.wait();
  return 0;
}

int cmd_replay(const std::string& space_path, const std::string& trace_path,
               const std::string& socket_path, const std::string& acquisition_path,
               const std::string& report_path, bool no_work) {
  ContextSpace space = parse_space(read_file(space_path));
  Trace trace = load_trace(trace_path);
  ReplayOptions options;
  options.socket_path = socket_path;
  options.simulate_work = !no_work;
  if (!acquisition_path.empty()) {
    nlohmann::json kv = nlohmann::json::parse(read_file(acquisition_path), nullptr, false);
    if (!kv.is_discarded()) options.acquisition = kv;
  }
  auto results = run_trace(trace, space, options);
  MetricsReport report = compute_metrics(results);
  write_output(report_path, report.to_json().dump(2) + "\n");
  return report.attacks_allowed == 0 ? 0 : 1;
}

int cmd_bench(const std::string& space_path, const std::string& traces_dir,
              const std::string& report_path, const std::string& socket_path,
              const std::string& acquisition_path, bool deterministic) {
  ContextSpace space = parse_space(read_file(space_path));
  ReplayOptions options;
  options.socket_path = socket_path;
  if (!acquisition_path.empty()) {
    nlohmann::json kv = nlohmann::json::parse(read_file(acquisition_path), nullptr, false);
    if (!kv.is_discarded()) options.acquisition = kv;
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(traces_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no trace files in " + traces_dir);

  std::vector<StepResult> guarded;
  std::vector<StepResult> unguarded;
  for (const auto& file : files) {
    Trace trace = load_trace(file.string());
    auto g = run_trace(trace, space, options);
    guarded.insert(guarded.end(), g.begin(), g.end());
    ReplayOptions base = options;
    base.guarded = false;
    auto u = run_trace(trace, space, base);
    unguarded.insert(unguarded.end(), u.begin(), u.end());
  }
  MetricsReport report = compute_metrics(guarded, &unguarded);
  write_output(report_path, report.to_json(!deterministic).dump(2) + "\n");
  std::cerr << "asr=" << report.asr << " benign_allow_rate=" << report.benign_allow_rate
            << " actions=" << report.attack_actions + report.benign_actions << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxguard: context-aware access control for computer-use agents"};
  app.require_subcommand(1);

  std::string space_path, function_id, docs_path, manifest_path, provider_spec = "stub";
  std::string canned, edges, out_path = "-", changelog_path, logs_path, config_path;
  std::string trace_path, socket_path, acquisition_path, traces_dir, report_path = "-";
  int threshold = 3;
  bool no_work = false;
  bool deterministic = false;

  auto* lint = app.add_subcommand("lint", "validate a context-space file");
  lint->add_option("space", space_path, "context-space JSON file")->required();

  auto* inspect = app.add_subcommand("inspect", "summarize a context space");
  inspect->add_option("space", space_path)->required();
  inspect->add_option("--function", function_id, "show one function in detail");

  auto* gen = app.add_subcommand("gen", "generate a context space from docs or a manifest");
  gen->add_option("--app", space_path, "application id")->required();
  gen->add_option("--docs", docs_path, "function docs JSON file");
  gen->add_option("--manifest", manifest_path, "GUI handler manifest JSON file");
  gen->add_option("--provider", provider_spec, "stub or provider URL");
  gen->add_option("--canned", canned, "canned stub responses file");
  gen->add_option("--edges", edges, "call-graph edges file for the manifest");
  gen->add_option("--out", out_path, "output file (default stdout)");

  auto* evolve = app.add_subcommand("evolve", "apply a changelog or analyze runtime logs");
  evolve->add_option("--space", space_path)->required();
  evolve->add_option("--changelog", changelog_path, "changelog JSON file");
  evolve->add_option("--logs", logs_path, "event log (NDJSON) to analyze");
  evolve->add_option("--provider", provider_spec, "stub or provider URL");
  evolve->add_option("--canned", canned);
  evolve->add_option("--threshold", threshold, "suggestion threshold K");
  evolve->add_option("--out", out_path);

  auto* serve = app.add_subcommand("serve", "run the guard service");
  serve->add_option("--config", config_path, "service config JSON file");

  auto* replay = app.add_subcommand("replay", "replay one trace against a space");
  replay->add_option("--space", space_path)->required();
  replay->add_option("--trace", trace_path)->required();
  replay->add_option("--socket", socket_path, "replay over a live service socket");
  bool inproc = false;
  replay->add_flag("--inproc", inproc, "replay in-process (default)");
  replay->add_option("--acquisition", acquisition_path, "fixture key-value JSON");
  replay->add_option("--report", report_path);
  replay->add_flag("--no-work", no_work, "skip simulated action execution time");

  auto* bench = app.add_subcommand("bench", "replay a trace corpus and report metrics");
  bench->add_option("--space", space_path)->required();
  bench->add_option("--traces", traces_dir, "directory of trace JSON files")->required();
  bench->add_option("--report", report_path, "output report path")->required();
  bench->add_option("--socket", socket_path);
  bench->add_option("--acquisition", acquisition_path);
  bench->add_flag("--deterministic", deterministic, "omit latency numbers from the report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lint->parsed()) return cmd_lint(space_path);
    if (inspect->parsed()) return cmd_inspect(space_path, function_id);
    if (gen->parsed())
      return cmd_gen(space_path, docs_path, manifest_path, provider_spec, canned, edges, out_path);
    if (evolve->parsed())
      return cmd_evolve(space_path, changelog_path, logs_path, provider_spec, canned, threshold,
                        out_path);
    if (serve->parsed()) return cmd_serve(config_path);
    if (replay->parsed())
      return cmd_replay(space_path, trace_path, socket_path, acquisition_path, report_path,
                        no_work);
    if (bench->parsed())
      return cmd_bench(space_path, traces_dir, report_path, socket_path, acquisition_path,
                       deterministic);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
