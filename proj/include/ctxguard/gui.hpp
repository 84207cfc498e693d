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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxguard/space.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// GUI hierarchy dumps and coordinate hit testing. Agents click coordinates,
// not functions; this module resolves a point to the on-screen element and
// the element to its function entry via (package, class, resource-id).
// ---------------------------------------------------------------------------

struct GuiNode {
  int left = 0, top = 0, right = 0, bottom = 0;
  std::string package;
  std::string widget_class;
  std::string resource_id;
  bool clickable = false;
  std::vector<GuiNode> children;
  int doc_index = 0;  // position in document order, unique per tree

  bool contains(int x, int y) const {
    // Half-open bounds: adjacent elements never share a boundary pixel.
    return x >= left && x < right && y >= top && y < bottom;
  }
};

struct GuiTree {
  std::vector<GuiNode> roots;
  int node_count = 0;
};

struct GuiAction {
  enum class Kind { click, long_click, input, scroll };
  Kind kind = Kind::click;
  int x = 0, y = 0;
  std::string text;       // input
  std::string direction;  // scroll

  static GuiAction from_json(const nlohmann::json& j);  // throws std::invalid_argument
  nlohmann::json to_json() const;
};

class GuiParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the XML hierarchy-dump dialect: `node` elements with `package`,
/// `class`, `resource-id`, `clickable` and `bounds="[l,t][r,b]"` attributes,
/// optionally wrapped in a `hierarchy` root.
GuiTree parse_tree(std::string_view document);

/// Canonical dump of a tree; parse_tree(serialize_tree(t)) preserves every
/// node attribute.
std::string serialize_tree(const GuiTree& tree);

/// Deepest clickable node containing the point; ties at equal depth go to
/// the later-drawn node (greater doc_index). Non-clickable containers are
/// transparent. nullptr = miss.
const GuiNode* locate(const GuiTree& tree, int x, int y);

/// Resolves a node to its function entry through the space's GUI bindings.
const FunctionEntry* map_to_function(const ContextSpace& space, const GuiNode& node);

}  // namespace ctxguard
