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

#include <random>
#include <string>

#include "ctxguard/gui.hpp"
#include "ctxguard/space.hpp"

namespace ctxguard::testgen {

inline std::string fixture_path(const std::string& rel) {
  return std::string(CTXGUARD_FIXTURE_DIR) + "/" + rel;
}

/// Smallest valid space: one normal function, zero contexts.
ContextSpace minimal_space();

/// Tiny space used by a handful of unit tests: one conditional function
/// with two rules, one normal, one dangerous.
ContextSpace tiny_conditional_space();

/// Space with `n_rules` boolean rules (ctx c1..cn, each `ci == true`) on one
/// conditional function whose single intent matches the instruction
/// "run the batch job". Contexts are func_params/hot so actions drive them.
ContextSpace synthetic_rule_space(int n_rules);

/// Desk-scale replica of a large production space: `functions` entries and
/// exactly `contexts` declared contexts.
ContextSpace paper_scale_space(int functions = 150, int contexts = 239);

/// Random GUI tree with the given node budget; some nodes clickable, sibling
/// boxes may overlap. Deterministic under the caller's RNG.
GuiTree random_tree(std::mt19937& rng, int max_nodes, int width = 1080, int height = 1920);

}  // namespace ctxguard::testgen
