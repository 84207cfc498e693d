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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ctxguard {

/// Runtime type of a context value. `floating` serializes as "float".
enum class ValueType { string, boolean, integer, floating, string_list };

using StringList = std::vector<std::string>;

/// A typed context value. Variant order matters: booleans must be probed
/// before integers when converting from JSON.
using Value = std::variant<std::string, bool, std::int64_t, double, StringList>;

ValueType value_type(const Value& v);

std::string value_type_name(ValueType t);
std::optional<ValueType> value_type_from_name(std::string_view name);

nlohmann::json value_to_json(const Value& v);

/// Converts JSON to a Value of the expected type. With `coerce`, lossless
/// conversions are applied: "42" -> 42, 3.0 -> 3, integers widen to float.
/// Returns nullopt when the JSON cannot represent the expected type.
std::optional<Value> value_from_json(const nlohmann::json& j, ValueType expected,
                                     bool coerce = false);

std::string value_repr(const Value& v);

/// Three-valued logic result of a constraint evaluation. `unknown` arises
/// only when a referenced context has no value yet.
enum class TriBool { no, yes, unknown };

inline const char* to_string(TriBool t) {
  switch (t) {
    case TriBool::no: return "false";
    case TriBool::yes: return "true";
    case TriBool::unknown: return "unknown";
  }
  return "?";
}

}  // namespace ctxguard
