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

#include "ctxguard/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ctxguard/service.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Trace loading
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TraceStep parse_step(const nlohmann::json& j, std::size_t index, const std::string& base_dir) {
  if (!j.is_object()) throw TraceError("step " + std::to_string(index) + " must be an object");
  std::string kind = j.value("kind", "");
  TraceStep step;
  if (kind == "instruction") {
    step.kind = TraceStep::Kind::instruction;
    if (!j.contains("text") || !j["text"].is_string())
      throw TraceError("instruction step " + std::to_string(index) + " needs 'text'");
    step.text = j["text"].get<std::string>();
    return step;
  }
  if (kind == "action") {
    step.kind = TraceStep::Kind::action;
    step.label = j.value("label", "");
    if (step.label != "benign" && step.label != "attack")
      throw TraceError("action step " + std::to_string(index) +
                       " needs a 'benign' or 'attack' label");
    nlohmann::json payload = j;
    if (payload.contains("tree_file")) {
      std::filesystem::path p = payload["tree_file"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      payload["tree"] = read_file(p.string());
      payload.erase("tree_file");
    }
    try {
      step.action = ActionPayload::from_json(payload);
    } catch (const std::invalid_argument& e) {
      throw TraceError("action step " + std::to_string(index) + ": " + e.what());
    }
    step.duration_ms = j.value("duration_ms", 5.0);
    return step;
  }
  if (kind == "expect") {
    step.kind = TraceStep::Kind::expect;
    step.expected = j.value("decision", "");
    if (step.expected != "allow" && step.expected != "block" && step.expected != "confirm" &&
        step.expected != "miss")
      throw TraceError("expect step " + std::to_string(index) + " has unknown decision '" +
                       step.expected + "'");
    step.resolve = j.value("resolve", "");
    if (!step.resolve.empty() && step.resolve != "allow" && step.resolve != "deny")
      throw TraceError("expect step " + std::to_string(index) + " has unknown resolve '" +
                       step.resolve + "'");
    return step;
  }
  throw TraceError("step " + std::to_string(index) + " has unknown kind '" + kind + "'");
}

}  // namespace

Trace trace_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array())
    throw TraceError("trace document needs a 'steps' array");
  Trace trace;
  trace.name = j.value("name", "trace");
  bool saw_instruction = false;
  bool saw_action = false;
  std::size_t index = 0;
  for (const auto& e : j["steps"]) {
    TraceStep step = parse_step(e, index, base_dir);
    if (index == 0 && step.kind != TraceStep::Kind::instruction)
      throw TraceError("a trace must start with an instruction step");
    if (step.kind == TraceStep::Kind::action && !saw_instruction)
      throw TraceError("action step " + std::to_string(index) + " precedes any instruction");
    if (step.kind == TraceStep::Kind::expect && !saw_action)
      throw TraceError("expect step " + std::to_string(index) + " has no action to check");
    if (step.kind == TraceStep::Kind::instruction) saw_instruction = true;
    if (step.kind == TraceStep::Kind::action) saw_action = true;
    trace.steps.push_back(std::move(step));
    ++index;
  }
  return trace;
}

Trace load_trace(const std::string& path) {
  nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw TraceError("trace file is malformed JSON: " + path);
  Trace t = trace_from_json(doc, std::filesystem::path(path).parent_path().string());
  if (t.name == "trace") t.name = std::filesystem::path(path).stem().string();
  return t;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void simulate_work(const ReplayOptions& options, double duration_ms, StepResult& result) {
  result.exec_ms = duration_ms;
  if (options.simulate_work && duration_ms > 0)
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(duration_ms));
}

/// Transport-independent driver: the same replay loop runs against the
/// in-process runtime and the live socket.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual void register_space(const ContextSpace& space) = 0;
  virtual void instruction(const std::string& text) = 0;
  /// Returns (verdict, event_id).
  virtual std::pair<std::string, std::uint64_t> pre_action(const ActionPayload& action) = 0;
  virtual std::string confirm(std::uint64_t event_id, bool allow) = 0;
  virtual void post_action(const std::string& function_id, const nlohmann::json& params) = 0;
};

class InprocDriver : public Driver {
 public:
  explicit InprocDriver(const ReplayOptions& options)
      : runtime_(options.runtime, fixture_acquisition(options.acquisition),
                 std::make_shared<KeywordExtractor>(), std::make_shared<HashedBagEmbedder>()),
        session_(runtime_.open_session("replay")) {}

  void register_space(const ContextSpace& space) override {
    runtime_.register_app(session_, space);
  }
  void instruction(const std::string& text) override { runtime_.instruction(session_, text); }
  std::pair<std::string, std::uint64_t> pre_action(const ActionPayload& action) override {
    Decision d = runtime_.pre_action(session_, action);
    return {to_string(d.verdict), d.event_id};
  }
  std::string confirm(std::uint64_t event_id, bool allow) override {
    return to_string(runtime_.confirm(session_, event_id, allow).verdict);
  }
  void post_action(const std::string& function_id, const nlohmann::json& params) override {
    runtime_.post_action(session_, function_id, params, "ok");
  }

 private:
  GuardRuntime runtime_;
  Session& session_;
};

class SocketDriver : public Driver {
 public:
  explicit SocketDriver(const std::string& socket_path) : client_(socket_path) {}

  void register_space(const ContextSpace& space) override {
    nlohmann::json frame = {{"id", next_id_++},
                            {"type", "register_app"},
                            {"space", nlohmann::json::parse(serialize_space(space))}};
    expect_no_error(client_.request(frame));
  }
  void instruction(const std::string& text) override {
    expect_no_error(client_.request({{"id", next_id_++}, {"type", "instruction"}, {"text", text}}));
  }
  std::pair<std::string, std::uint64_t> pre_action(const ActionPayload& action) override {
    nlohmann::json frame = action.to_json();
    frame["id"] = next_id_++;
    frame["type"] = "pre_action";
    nlohmann::json resp = client_.request(frame);
    expect_no_error(resp);
    return {resp.value("verdict", "block"), resp.value("event_id", 0ull)};
  }
  std::string confirm(std::uint64_t event_id, bool allow) override {
    nlohmann::json resp = client_.request({{"id", next_id_++},
                                           {"type", "confirm_response"},
                                           {"event_id", event_id},
                                           {"allow", allow}});
    expect_no_error(resp);
    return resp.value("verdict", "block");
  }
  void post_action(const std::string& function_id, const nlohmann::json& params) override {
    expect_no_error(client_.request({{"id", next_id_++},
                                     {"type", "post_action"},
                                     {"function", function_id},
                                     {"params", params},
                                     {"outcome", "ok"}}));
  }

 private:
  static void expect_no_error(const nlohmann::json& resp) {
    if (resp.value("type", "") == "error")
      throw TraceError("service error: " + resp.value("msg", "unknown"));
  }

  LineClient client_;
  std::uint64_t next_id_ = 1;
};

std::string action_function_label(const TraceStep& step) {
  if (step.action.mode == ActionPayload::Mode::direct) return step.action.function_id;
  return "gui(" + std::to_string(step.action.gui.x) + "," + std::to_string(step.action.gui.y) + ")";
}

}  // namespace

std::vector<StepResult> run_trace(const Trace& trace, const ContextSpace& space,
                                  const ReplayOptions& options) {
  std::vector<StepResult> results;
  if (trace.steps.empty()) return results;

  if (!options.guarded) {
    // Baseline: every action executes, nothing is validated.
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const TraceStep& step = trace.steps[i];
      if (step.kind != TraceStep::Kind::action) continue;
      StepResult r;
      r.step_index = i;
      r.function_id = action_function_label(step);
      r.label = step.label;
      r.initial_verdict = "allow";
      r.final_verdict = "allow";
      r.executed = true;
      simulate_work(options, step.duration_ms, r);
      results.push_back(std::move(r));
    }
    return results;
  }

  std::unique_ptr<Driver> driver;
  if (options.socket_path.empty())
    driver = std::make_unique<InprocDriver>(options);
  else
    driver = std::make_unique<SocketDriver>(options.socket_path);
  driver->register_space(space);

  StepResult* last_action = nullptr;
  std::uint64_t last_event_id = 0;
  const TraceStep* last_action_step = nullptr;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    switch (step.kind) {
      case TraceStep::Kind::instruction:
        driver->instruction(step.text);
        break;
      case TraceStep::Kind::action: {
        StepResult r;
        r.step_index = i;
        r.function_id = action_function_label(step);
        r.label = step.label;
        auto start = Clock::now();
        auto [verdict, event_id] = driver->pre_action(step.action);
        r.pre_action_ms = ms_since(start);
        r.initial_verdict = verdict;
        r.final_verdict = verdict;
        results.push_back(std::move(r));
        last_action = &results.back();
        last_event_id = event_id;
        last_action_step = &step;
        // Confirms without a following expect step resolve with the batch
        // default right away; an expect step overrides below.
        if (verdict == "confirm") {
          bool resolved_by_expect =
              i + 1 < trace.steps.size() && trace.steps[i + 1].kind == TraceStep::Kind::expect &&
              !trace.steps[i + 1].resolve.empty();
          if (!resolved_by_expect)
            last_action->final_verdict =
                driver->confirm(event_id, options.default_confirm == "allow");
        }
        if (last_action->final_verdict == "allow") {
          last_action->executed = true;
          simulate_work(options, step.duration_ms, *last_action);
          if (step.action.mode == ActionPayload::Mode::direct)
            driver->post_action(step.action.function_id, step.action.params);
        }
        break;
      }
      case TraceStep::Kind::expect: {
        if (!last_action) break;
        last_action->expectation_checked = true;
        last_action->expectation_matched = last_action->initial_verdict == step.expected;
        if (!step.resolve.empty() && (last_action->initial_verdict == "confirm" ||
                                      last_action->initial_verdict == "block")) {
          last_action->final_verdict = driver->confirm(last_event_id, step.resolve == "allow");
          if (last_action->final_verdict == "allow" && !last_action->executed &&
              last_action_step) {
            last_action->executed = true;
            simulate_work(options, last_action_step->duration_ms, *last_action);
            if (last_action_step->action.mode == ActionPayload::Mode::direct)
              driver->post_action(last_action_step->action.function_id,
                                  last_action_step->action.params);
          }
        }
        break;
      }
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

LatencyStats latency_stats(std::vector<double> samples) {
  LatencyStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean_ms = sum / static_cast<double>(samples.size());
  s.median_ms = samples[samples.size() / 2];
  std::size_t p95 = static_cast<std::size_t>(static_cast<double>(samples.size() - 1) * 0.95);
  s.p95_ms = samples[p95];
  return s;
}

double total_latency(const std::vector<StepResult>& results) {
  double total = 0;
  for (const auto& r : results) total += r.pre_action_ms + r.exec_ms;
  return total;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<StepResult>& guarded,
                              const std::vector<StepResult>* unguarded) {
  MetricsReport report;
  std::vector<double> latencies;
  for (const auto& r : guarded) {
    bool allowed = r.final_verdict == "allow";
    if (r.label == "attack") {
      ++report.attack_actions;
      if (allowed) ++report.attacks_allowed;
    } else {
      ++report.benign_actions;
      if (allowed) ++report.benign_allowed;
    }
    if (r.expectation_checked) {
      ++report.expectations;
      if (r.expectation_matched) ++report.expectations_matched;
    }
    latencies.push_back(r.pre_action_ms);
  }
  // Empty denominators report the vacuous value: no attacks means none
  // succeeded, no benign actions means nothing was wrongly blocked.
  report.asr = report.attack_actions == 0
                   ? 0.0
                   : static_cast<double>(report.attacks_allowed) /
                         static_cast<double>(report.attack_actions);
  report.benign_allow_rate = report.benign_actions == 0
                                 ? 1.0
                                 : static_cast<double>(report.benign_allowed) /
                                       static_cast<double>(report.benign_actions);
  report.expectation_match_rate = report.expectations == 0
                                      ? 1.0
                                      : static_cast<double>(report.expectations_matched) /
                                            static_cast<double>(report.expectations);
  report.latency = latency_stats(std::move(latencies));
  if (unguarded) {
    double base = total_latency(*unguarded);
    if (base > 0) report.overhead_pct = (total_latency(guarded) - base) / base * 100.0;
  }
  report.decisions = guarded;
  return report;
}

nlohmann::json MetricsReport::to_json(bool include_latency) const {
  nlohmann::json j;
  j["attack_actions"] = attack_actions;
  j["attacks_allowed"] = attacks_allowed;
  j["benign_actions"] = benign_actions;
  j["benign_allowed"] = benign_allowed;
  j["asr"] = asr;
  j["benign_allow_rate"] = benign_allow_rate;
  j["expectations"] = expectations;
  j["expectations_matched"] = expectations_matched;
  j["expectation_match_rate"] = expectation_match_rate;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : decisions)
    rows.push_back({{"step", r.step_index},
                    {"function", r.function_id},
                    {"label", r.label},
                    {"verdict", r.initial_verdict},
                    {"final", r.final_verdict}});
  j["decisions"] = std::move(rows);
  if (include_latency) {
    j["latency_ms"] = {{"mean", latency.mean_ms},
                       {"median", latency.median_ms},
                       {"p95", latency.p95_ms}};
    if (overhead_pct) j["overhead_pct"] = *overhead_pct;
  }
  return j;
}

}  // namespace ctxguard
