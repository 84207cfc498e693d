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

#include "ctxguard/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>

namespace ctxguard {

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
    case CmpOp::in: return "in";
    case CmpOp::not_in: return "not_in";
    case CmpOp::subset_of: return "subset_of";
    case CmpOp::contains: return "contains";
  }
  return "?";
}

namespace {

struct Token {
  enum class Kind { ident, str, integer, floating, symbol, lbrack, rbrack, comma, end };
  Kind kind;
  std::string text;
  std::int64_t int_value = 0;
  double float_value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    if (pos_ >= src_.size()) return {Token::Kind::end, ""};
    char c = src_[pos_];
    if (c == '[') { ++pos_; return {Token::Kind::lbrack, "["}; }
    if (c == ']') { ++pos_; return {Token::Kind::rbrack, "]"}; }
    if (c == ',') { ++pos_; return {Token::Kind::comma, ","}; }
    if (c == '"') return lex_string();
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return lex_number();
    if (std::islower(static_cast<unsigned char>(c)) || c == '_') return lex_ident();
    if (c == '=' || c == '!' || c == '<' || c == '>') return lex_symbol();
    throw ConstraintParseError(std::string("unexpected character '") + c + "' at offset " +
                               std::to_string(pos_));
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  Token lex_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < src_.size()) {
      char c = src_[pos_++];
      if (c == '"') return {Token::Kind::str, std::move(out)};
      if (c == '\\') {
        if (pos_ >= src_.size()) break;
        char e = src_[pos_++];
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default:
            throw ConstraintParseError(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out.push_back(c);
      }
    }
    throw ConstraintParseError("unterminated string literal");
  }

  Token lex_number() {
    std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    bool digits = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
      digits = true;
    }
    bool is_float = false;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        digits = true;
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      is_float = true;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    std::string text(src_.substr(start, pos_ - start));
    if (!digits) throw ConstraintParseError("malformed number '" + text + "'");
    Token t;
    t.text = text;
    if (is_float) {
      t.kind = Token::Kind::floating;
      t.float_value = std::strtod(text.c_str(), nullptr);
    } else {
      t.kind = Token::Kind::integer;
      t.int_value = std::strtoll(text.c_str(), nullptr, 10);
    }
    return t;
  }

  Token lex_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        ++pos_;
      } else {
        break;
      }
    }
    return {Token::Kind::ident, std::string(src_.substr(start, pos_ - start))};
  }

  Token lex_symbol() {
    std::size_t start = pos_;
    char c = src_[pos_++];
    if (pos_ < src_.size() && src_[pos_] == '=') {
      ++pos_;
    } else if (c == '=' || c == '!') {
      throw ConstraintParseError(std::string("unknown operator '") + c + "'");
    }
    return {Token::Kind::symbol, std::string(src_.substr(start, pos_ - start))};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::optional<CmpOp> op_from_token(const Token& t) {
  if (t.kind == Token::Kind::symbol) {
    if (t.text == "==") return CmpOp::eq;
    if (t.text == "!=") return CmpOp::ne;
    if (t.text == "<") return CmpOp::lt;
    if (t.text == "<=") return CmpOp::le;
    if (t.text == ">") return CmpOp::gt;
    if (t.text == ">=") return CmpOp::ge;
  } else if (t.kind == Token::Kind::ident) {
    if (t.text == "in") return CmpOp::in;
    if (t.text == "not_in") return CmpOp::not_in;
    if (t.text == "subset_of") return CmpOp::subset_of;
    if (t.text == "contains") return CmpOp::contains;
  }
  return std::nullopt;
}

Operand parse_operand(Lexer& lex, const Token& first) {
  switch (first.kind) {
    case Token::Kind::ident:
      if (first.text == "true") return Operand{Value{true}};
      if (first.text == "false") return Operand{Value{false}};
      return Operand{ContextRef{first.text}};
    case Token::Kind::str:
      return Operand{Value{first.text}};
    case Token::Kind::integer:
      return Operand{Value{first.int_value}};
    case Token::Kind::floating:
      return Operand{Value{first.float_value}};
    case Token::Kind::lbrack: {
      StringList items;
      Token t = lex.next();
      if (t.kind != Token::Kind::rbrack) {
        for (;;) {
          if (t.kind != Token::Kind::str)
            throw ConstraintParseError("list literals may contain only strings");
          items.push_back(t.text);
          t = lex.next();
          if (t.kind == Token::Kind::rbrack) break;
          if (t.kind != Token::Kind::comma)
            throw ConstraintParseError("expected ',' or ']' in list literal");
          t = lex.next();
        }
      }
      return Operand{Value{std::move(items)}};
    }
    default:
      throw ConstraintParseError("expected operand, got '" + first.text + "'");
  }
}

}  // namespace

ConstraintAst parse_constraint(std::string_view text) {
  Lexer lex(text);
  Token lhs = lex.next();
  if (lhs.kind != Token::Kind::ident)
    throw ConstraintParseError("constraint must start with a context identifier");
  if (op_from_token(lhs))
    throw ConstraintParseError("constraint must start with a context identifier");

  Token op_tok = lex.next();
  auto op = op_from_token(op_tok);
  if (!op) throw ConstraintParseError("unknown operator '" + op_tok.text + "'");

  Token rhs_tok = lex.next();
  ConstraintAst ast;
  ast.lhs = ContextRef{lhs.text};
  ast.op = *op;
  ast.rhs = parse_operand(lex, rhs_tok);

  Token trailing = lex.next();
  if (trailing.kind != Token::Kind::end)
    throw ConstraintParseError("trailing tokens after constraint: '" + trailing.text + "'");
  return ast;
}

namespace {

bool is_numeric(ValueType t) { return t == ValueType::integer || t == ValueType::floating; }

ValueType resolve_type(const Operand& o, const std::map<std::string, ContextMetadata>& table) {
  if (o.is_ref()) {
    auto it = table.find(o.ref().ctx_id);
    if (it == table.end())
      throw ConstraintTypeError("unresolved context reference '" + o.ref().ctx_id + "'");
    return it->second.type;
  }
  return value_type(o.literal());
}

bool comparable(ValueType a, ValueType b) {
  if (a == b) return true;
  return is_numeric(a) && is_numeric(b);
}

}  // namespace

void typecheck(const ConstraintAst& ast, const std::map<std::string, ContextMetadata>& table) {
  auto lhs_it = table.find(ast.lhs.ctx_id);
  if (lhs_it == table.end())
    throw ConstraintTypeError("unresolved context reference '" + ast.lhs.ctx_id + "'");
  ValueType lt = lhs_it->second.type;
  ValueType rt = resolve_type(ast.rhs, table);

  switch (ast.op) {
    case CmpOp::eq:
    case CmpOp::ne:
      if (!comparable(lt, rt))
        throw ConstraintTypeError("'" + to_string(ast.op) + "' operands have mismatched types (" +
                                  value_type_name(lt) + " vs " + value_type_name(rt) + ")");
      break;
    case CmpOp::lt:
    case CmpOp::le:
    case CmpOp::gt:
    case CmpOp::ge:
      if (!is_numeric(lt) || !is_numeric(rt))
        throw ConstraintTypeError("ordering '" + to_string(ast.op) +
                                  "' is defined only on integer/float operands");
      break;
    case CmpOp::in:
    case CmpOp::not_in:
      if (lt != ValueType::string || rt != ValueType::string_list)
        throw ConstraintTypeError("'" + to_string(ast.op) +
                                  "' needs a string lhs and a string_list rhs");
      break;
    case CmpOp::subset_of:
      if (lt != ValueType::string_list || rt != ValueType::string_list)
        throw ConstraintTypeError("'subset_of' needs string_list operands on both sides");
      break;
    case CmpOp::contains:
      if (lt == ValueType::string || lt == ValueType::string_list) {
        if (rt != ValueType::string)
          throw ConstraintTypeError("'contains' needs a string rhs");
      } else {
        throw ConstraintTypeError("'contains' needs a string or string_list lhs");
      }
      break;
  }
}

namespace {

std::optional<Value> resolve_value(const Operand& o, const ContextVector& cv) {
  if (o.is_ref()) return cv.get(o.ref().ctx_id);
  return o.literal();
}

std::optional<double> as_double(const Value& v) {
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::nullopt;
}

TriBool from_bool(bool b) { return b ? TriBool::yes : TriBool::no; }

TriBool eval_eq(const Value& a, const Value& b) {
  if (value_type(a) == value_type(b)) return from_bool(a == b);
  auto da = as_double(a);
  auto db = as_double(b);
  if (da && db) return from_bool(*da == *db);
  return TriBool::no;  // incomparable types never compare equal
}

TriBool eval_order(CmpOp op, const Value& a, const Value& b) {
  auto da = as_double(a);
  auto db = as_double(b);
  if (!da || !db) return TriBool::no;
  // Exact integer comparison when both sides are integers.
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    auto ia = std::get<std::int64_t>(a);
    auto ib = std::get<std::int64_t>(b);
    switch (op) {
      case CmpOp::lt: return from_bool(ia < ib);
      case CmpOp::le: return from_bool(ia <= ib);
      case CmpOp::gt: return from_bool(ia > ib);
      case CmpOp::ge: return from_bool(ia >= ib);
      default: return TriBool::no;
    }
  }
  switch (op) {
    case CmpOp::lt: return from_bool(*da < *db);
    case CmpOp::le: return from_bool(*da <= *db);
    case CmpOp::gt: return from_bool(*da > *db);
    case CmpOp::ge: return from_bool(*da >= *db);
    default: return TriBool::no;
  }
}

TriBool eval_membership(CmpOp op, const Value& a, const Value& b) {
  const auto* needle = std::get_if<std::string>(&a);
  const auto* haystack = std::get_if<StringList>(&b);
  if (!needle || !haystack) return TriBool::no;
  bool found = std::find(haystack->begin(), haystack->end(), *needle) != haystack->end();
  return from_bool(op == CmpOp::in ? found : !found);
}

TriBool eval_subset(const Value& a, const Value& b) {
  const auto* lhs = std::get_if<StringList>(&a);
  const auto* rhs = std::get_if<StringList>(&b);
  if (!lhs || !rhs) return TriBool::no;
  std::set<std::string> super(rhs->begin(), rhs->end());
  for (const auto& item : *lhs)
    if (!super.count(item)) return TriBool::no;
  return TriBool::yes;
}

TriBool eval_contains(const Value& a, const Value& b) {
  const auto* needle = std::get_if<std::string>(&b);
  if (!needle) return TriBool::no;
  if (const auto* s = std::get_if<std::string>(&a))
    return from_bool(s->find(*needle) != std::string::npos);
  if (const auto* list = std::get_if<StringList>(&a))
    return from_bool(std::find(list->begin(), list->end(), *needle) != list->end());
  return TriBool::no;
}

}  // namespace

TriBool evaluate(const ConstraintAst& ast, const ContextVector& cv) {
  auto lhs = cv.get(ast.lhs.ctx_id);
  if (!lhs) return TriBool::unknown;
  auto rhs = resolve_value(ast.rhs, cv);
  if (!rhs) return TriBool::unknown;

  switch (ast.op) {
    case CmpOp::eq: return eval_eq(*lhs, *rhs);
    case CmpOp::ne: {
      TriBool eq = eval_eq(*lhs, *rhs);
      return eq == TriBool::yes ? TriBool::no : TriBool::yes;
    }
    case CmpOp::lt:
    case CmpOp::le:
    case CmpOp::gt:
    case CmpOp::ge: return eval_order(ast.op, *lhs, *rhs);
    case CmpOp::in:
    case CmpOp::not_in: return eval_membership(ast.op, *lhs, *rhs);
    case CmpOp::subset_of: return eval_subset(*lhs, *rhs);
    case CmpOp::contains: return eval_contains(*lhs, *rhs);
  }
  return TriBool::no;
}

}  // namespace ctxguard
