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

#include "ctxguard/gui.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

namespace ctxguard {

GuiAction GuiAction::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("gui action must be an object");
  GuiAction a;
  std::string kind = j.value("kind", "click");
  if (kind == "click")
    a.kind = Kind::click;
  else if (kind == "long_click")
    a.kind = Kind::long_click;
  else if (kind == "input")
    a.kind = Kind::input;
  else if (kind == "scroll")
    a.kind = Kind::scroll;
  else
    throw std::invalid_argument("unknown gui action kind '" + kind + "'");
  if (!j.contains("x") || !j.contains("y") || !j["x"].is_number_integer() ||
      !j["y"].is_number_integer())
    throw std::invalid_argument("gui action needs integer x/y coordinates");
  a.x = j["x"].get<int>();
  a.y = j["y"].get<int>();
  if (a.x < 0 || a.y < 0) throw std::invalid_argument("gui action coordinates must be >= 0");
  a.text = j.value("text", "");
  a.direction = j.value("direction", "");
  return a;
}

nlohmann::json GuiAction::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::click: j["kind"] = "click"; break;
    case Kind::long_click: j["kind"] = "long_click"; break;
    case Kind::input: j["kind"] = "input"; break;
    case Kind::scroll: j["kind"] = "scroll"; break;
  }
  j["x"] = x;
  j["y"] = y;
  if (kind == Kind::input) j["text"] = text;
  if (kind == Kind::scroll) j["direction"] = direction;
  return j;
}

// ---------------------------------------------------------------------------
// Hierarchy-dump parser. The dialect is small enough that a hand parser
// beats pulling in an XML library: node elements, five attributes, optional
// hierarchy wrapper, no text content.
// ---------------------------------------------------------------------------

namespace {

class XmlCursor {
 public:
  explicit XmlCursor(std::string_view src) : src_(src) {}

  void skip_prolog() {
    skip_ws();
    while (pos_ + 1 < src_.size() && src_[pos_] == '<' &&
           (src_[pos_ + 1] == '?' || src_[pos_ + 1] == '!')) {
      if (src_.compare(pos_, 4, "<!--") == 0) {
        auto end = src_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else {
        auto end = src_.find('>', pos_);
        if (end == std::string_view::npos) fail("unterminated declaration");
        pos_ = end + 1;
      }
      skip_ws();
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= src_.size();
  }

  bool at_close_tag() {
    skip_ws();
    return pos_ + 1 < src_.size() && src_[pos_] == '<' && src_[pos_ + 1] == '/';
  }

  std::string open_tag() {
    skip_ws();
    skip_prolog();
    if (pos_ >= src_.size() || src_[pos_] != '<') fail("expected element");
    ++pos_;
    return read_name();
  }

  void close_tag(const std::string& name) {
    skip_ws();
    if (src_.compare(pos_, 2, "</") != 0) fail("expected closing tag");
    pos_ += 2;
    std::string found = read_name();
    if (found != name) fail("mismatched closing tag '" + found + "'");
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '>') fail("malformed closing tag");
    ++pos_;
  }

  /// Reads attributes up to '>' or '/>'. Returns true when self-closing.
  bool attributes(std::map<std::string, std::string>& out) {
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated element");
      if (src_[pos_] == '>') {
        ++pos_;
        return false;
      }
      if (src_.compare(pos_, 2, "/>") == 0) {
        pos_ += 2;
        return true;
      }
      std::string name = read_name();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '=') fail("attribute '" + name + "' needs a value");
      ++pos_;
      skip_ws();
      if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\''))
        fail("attribute '" + name + "' value must be quoted");
      char quote = src_[pos_++];
      std::string value;
      while (pos_ < src_.size() && src_[pos_] != quote) value.push_back(src_[pos_++]);
      if (pos_ >= src_.size()) fail("unterminated attribute value");
      ++pos_;
      out[name] = decode_entities(value);
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw GuiParseError(msg + " at offset " + std::to_string(pos_));
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string read_name() {
    std::string name;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':') {
        name.push_back(c);
        ++pos_;
      } else {
        break;
      }
    }
    if (name.empty()) fail("expected a name");
    return name;
  }

  static std::string decode_entities(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
      if (s[i] != '&') {
        out.push_back(s[i++]);
        continue;
      }
      auto semi = s.find(';', i);
      if (semi == std::string::npos) {
        out.push_back(s[i++]);
        continue;
      }
      std::string entity = s.substr(i + 1, semi - i - 1);
      if (entity == "amp")
        out.push_back('&');
      else if (entity == "lt")
        out.push_back('<');
      else if (entity == "gt")
        out.push_back('>');
      else if (entity == "quot")
        out.push_back('"');
      else if (entity == "apos")
        out.push_back('\'');
      else if (!entity.empty() && entity[0] == '#')
        out.push_back(static_cast<char>(std::atoi(entity.c_str() + 1)));
      else
        throw GuiParseError("unknown entity '&" + entity + ";'");
      i = semi + 1;
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void parse_bounds(const std::string& s, GuiNode& node) {
  // "[l,t][r,b]"
  int fields[4];
  std::size_t pos = 0;
  auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c)
      throw GuiParseError("malformed bounds '" + s + "'");
    ++pos;
  };
  auto number = [&]() {
    std::size_t start = pos;
    if (pos < s.size() && s[pos] == '-') ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw GuiParseError("malformed bounds '" + s + "'");
    return std::atoi(s.substr(start, pos - start).c_str());
  };
  expect('[');
  fields[0] = number();
  expect(',');
  fields[1] = number();
  expect(']');
  expect('[');
  fields[2] = number();
  expect(',');
  fields[3] = number();
  expect(']');
  if (pos != s.size()) throw GuiParseError("malformed bounds '" + s + "'");
  node.left = fields[0];
  node.top = fields[1];
  node.right = fields[2];
  node.bottom = fields[3];
  if (node.left > node.right || node.top > node.bottom)
    throw GuiParseError("inverted bounds '" + s + "'");
}

GuiNode parse_node(XmlCursor& cur, const std::string& name, int& next_index);

void parse_children(XmlCursor& cur, GuiNode& parent, int& next_index) {
  while (!cur.at_close_tag()) {
    std::string child_name = cur.open_tag();
    parent.children.push_back(parse_node(cur, child_name, next_index));
  }
}

GuiNode parse_node(XmlCursor& cur, const std::string& name, int& next_index) {
  if (name != "node") cur.fail("unexpected element '" + name + "'");
  GuiNode node;
  node.doc_index = next_index++;
  std::map<std::string, std::string> attrs;
  bool self_closing = cur.attributes(attrs);
  auto bounds = attrs.find("bounds");
  if (bounds == attrs.end()) throw GuiParseError("node is missing its bounds attribute");
  parse_bounds(bounds->second, node);
  node.package = attrs.count("package") ? attrs["package"] : "";
  node.widget_class = attrs.count("class") ? attrs["class"] : "";
  node.resource_id = attrs.count("resource-id") ? attrs["resource-id"] : "";
  node.clickable = attrs.count("clickable") && attrs["clickable"] == "true";
  if (!self_closing) {
    parse_children(cur, node, next_index);
    cur.close_tag("node");
  }
  return node;
}

}  // namespace

GuiTree parse_tree(std::string_view document) {
  XmlCursor cur(document);
  cur.skip_prolog();
  GuiTree tree;
  int next_index = 0;
  std::string root = cur.open_tag();
  if (root == "hierarchy") {
    std::map<std::string, std::string> attrs;
    bool self_closing = cur.attributes(attrs);
    if (!self_closing) {
      while (!cur.at_close_tag()) {
        std::string name = cur.open_tag();
        tree.roots.push_back(parse_node(cur, name, next_index));
      }
      cur.close_tag("hierarchy");
    }
  } else {
    tree.roots.push_back(parse_node(cur, root, next_index));
  }
  if (!cur.at_end()) cur.fail("trailing content after document root");
  tree.node_count = next_index;
  return tree;
}

namespace {

std::string encode_entities(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void serialize_node(const GuiNode& n, std::string& out, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "<node bounds=\"[" + std::to_string(n.left) + "," + std::to_string(n.top) + "][" +
         std::to_string(n.right) + "," + std::to_string(n.bottom) + "]\"";
  out += " class=\"" + encode_entities(n.widget_class) + "\"";
  out += std::string(" clickable=\"") + (n.clickable ? "true" : "false") + "\"";
  out += " package=\"" + encode_entities(n.package) + "\"";
  out += " resource-id=\"" + encode_entities(n.resource_id) + "\"";
  if (n.children.empty()) {
    out += " />\n";
    return;
  }
  out += ">\n";
  for (const auto& c : n.children) serialize_node(c, out, depth + 1);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</node>\n";
}

}  // namespace

std::string serialize_tree(const GuiTree& tree) {
  std::string out = "<hierarchy>\n";
  for (const auto& r : tree.roots) serialize_node(r, out, 1);
  out += "</hierarchy>\n";
  return out;
}

namespace {

void locate_impl(const GuiNode& node, int x, int y, int depth, const GuiNode*& best,
                 int& best_depth, int& best_index) {
  if (node.clickable && node.contains(x, y)) {
    if (depth > best_depth || (depth == best_depth && node.doc_index > best_index)) {
      best = &node;
      best_depth = depth;
      best_index = node.doc_index;
    }
  }
  for (const auto& child : node.children) locate_impl(child, x, y, depth + 1, best, best_depth, best_index);
}

}  // namespace

const GuiNode* locate(const GuiTree& tree, int x, int y) {
  const GuiNode* best = nullptr;
  int best_depth = -1;
  int best_index = -1;
  for (const auto& root : tree.roots) locate_impl(root, x, y, 0, best, best_depth, best_index);
  return best;
}

const FunctionEntry* map_to_function(const ContextSpace& space, const GuiNode& node) {
  if (node.resource_id.empty()) return nullptr;
  return lookup_function_by_gui(space, node.package, node.widget_class, node.resource_id);
}

}  // namespace ctxguard
