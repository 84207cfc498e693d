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

#include <optional>
#include <string>
#include <vector>

#include "ctxguard/runtime.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Trace replay: scripted instruction/action sequences labeled benign or
// attack drive the full pipeline, producing the security/utility/overhead
// metrics the service is judged by.
// ---------------------------------------------------------------------------

struct TraceStep {
  enum class Kind { instruction, action, expect };
  Kind kind = Kind::instruction;

  std::string text;  // instruction

  ActionPayload action;  // action
  std::string label;     // "benign" | "attack"
  double duration_ms = 5.0;  // simulated execution time of the real action

  std::string expected;  // expect: allow | block | confirm | miss
  std::string resolve;   // expect: how to answer a confirm ("allow"/"deny")
};

struct Trace {
  std::string name;
  std::vector<TraceStep> steps;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Trace load_trace(const std::string& path);
Trace trace_from_json(const nlohmann::json& j, const std::string& base_dir = "");

struct StepResult {
  std::size_t step_index = 0;
  std::string function_id;
  std::string label;
  std::string initial_verdict;  // as returned by pre_action
  std::string final_verdict;    // after confirm resolution
  bool executed = false;
  double pre_action_ms = 0.0;
  double exec_ms = 0.0;
  bool expectation_checked = false;
  bool expectation_matched = false;
};

struct ReplayOptions {
  bool guarded = true;
  /// Empty: drive the pipeline in-process. Otherwise connect to a running
  /// service at this socket path (the space is registered inline).
  std::string socket_path;
  /// Sleep each action's duration_ms to model the real action's cost.
  bool simulate_work = true;
  /// Batch answer for confirms without an expect-step resolution.
  std::string default_confirm = "deny";
  /// In-process runtime knobs.
  RuntimeConfig runtime;
  nlohmann::json acquisition = nlohmann::json::object();
};

std::vector<StepResult> run_trace(const Trace& trace, const ContextSpace& space,
                                  const ReplayOptions& options);

struct LatencyStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct MetricsReport {
  std::size_t attack_actions = 0;
  std::size_t attacks_allowed = 0;
  std::size_t benign_actions = 0;
  std::size_t benign_allowed = 0;
  double asr = 0.0;
  double benign_allow_rate = 1.0;
  std::size_t expectations = 0;
  std::size_t expectations_matched = 0;
  double expectation_match_rate = 1.0;
  LatencyStats latency;
  std::optional<double> overhead_pct;
  std::vector<StepResult> decisions;

  /// Canonical report document. Latency numbers vary run to run, so they
  /// are optional; everything else is bit-reproducible with stub providers.
  nlohmann::json to_json(bool include_latency = true) const;
};

MetricsReport compute_metrics(const std::vector<StepResult>& guarded,
                              const std::vector<StepResult>* unguarded = nullptr);

}  // namespace ctxguard
