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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "ctxguard/space.hpp"
#include "ctxguard/value.hpp"

namespace ctxguard {

// ---------------------------------------------------------------------------
// Constraint DSL: a single relational expression `ctx op operand`.
//
// Grammar:
//   constraint := ident op operand
//   operand    := ident | string | number | boolean | list
//   list       := "[" (string ("," string)*)? "]"
//   ident      := [a-z_][a-z0-9_.]*
//   op         := == | != | < | <= | > | >= | in | not_in | subset_of | contains
//
// Conjunction is expressed as multiple rules in a policy; there is no
// boolean composition inside one constraint.
// ---------------------------------------------------------------------------

enum class CmpOp { eq, ne, lt, le, gt, ge, in, not_in, subset_of, contains };

std::string to_string(CmpOp op);

struct ContextRef {
  std::string ctx_id;
};

/// Either a reference to another context or a literal of one value type.
struct Operand {
  std::variant<ContextRef, Value> node;

  bool is_ref() const { return node.index() == 0; }
  const ContextRef& ref() const { return std::get<ContextRef>(node); }
  const Value& literal() const { return std::get<Value>(node); }
};

struct ConstraintAst {
  ContextRef lhs;  // the rule's subject context
  CmpOp op = CmpOp::eq;
  Operand rhs;
};

class ConstraintParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstraintTypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a constraint; whitespace between tokens is insignificant.
ConstraintAst parse_constraint(std::string_view text);

/// Checks the operator/operand typing rules against the declared context
/// types. Integer and float are mutually comparable; ordering is defined
/// only on numbers; in/not_in need a string lhs and list rhs; subset_of
/// needs lists on both sides; contains needs a string or list lhs with a
/// string rhs. Throws ConstraintTypeError.
void typecheck(const ConstraintAst& ast, const std::map<std::string, ContextMetadata>& table);

/// Tri-state evaluation against the current context vector. Returns unknown
/// iff any referenced context is unset. Total over typechecked input; an
/// operand type mismatch at runtime evaluates to false (fail closed).
TriBool evaluate(const ConstraintAst& ast, const ContextVector& cv);

}  // namespace ctxguard
