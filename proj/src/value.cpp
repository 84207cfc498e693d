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

#include "ctxguard/value.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

namespace ctxguard {

ValueType value_type(const Value& v) {
  switch (v.index()) {
    case 0: return ValueType::string;
    case 1: return ValueType::boolean;
    case 2: return ValueType::integer;
    case 3: return ValueType::floating;
    default: return ValueType::string_list;
  }
}

std::string value_type_name(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::boolean: return "boolean";
    case ValueType::integer: return "integer";
    case ValueType::floating: return "float";
    case ValueType::string_list: return "string_list";
  }
  return "?";
}

std::optional<ValueType> value_type_from_name(std::string_view name) {
  if (name == "string") return ValueType::string;
  if (name == "boolean") return ValueType::boolean;
  if (name == "integer") return ValueType::integer;
  if (name == "float") return ValueType::floating;
  if (name == "string_list") return ValueType::string_list;
  return std::nullopt;
}

nlohmann::json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

namespace {

std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  long long n = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return static_cast<std::int64_t>(n);
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return d;
}

}  // namespace

std::optional<Value> value_from_json(const nlohmann::json& j, ValueType expected,
                                     bool coerce) {
  switch (expected) {
    case ValueType::string:
      if (j.is_string()) return Value{j.get<std::string>()};
      return std::nullopt;
    case ValueType::boolean:
      if (j.is_boolean()) return Value{j.get<bool>()};
      if (coerce && j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "true") return Value{true};
        if (s == "false") return Value{false};
      }
      return std::nullopt;
    case ValueType::integer:
      if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
      if (coerce && j.is_number_float()) {
        double d = j.get<double>();
        if (std::trunc(d) == d) return Value{static_cast<std::int64_t>(d)};
      }
      if (coerce && j.is_string()) {
        if (auto n = parse_int(j.get<std::string>())) return Value{*n};
      }
      return std::nullopt;
    case ValueType::floating:
      if (j.is_number()) return Value{j.get<double>()};
      if (coerce && j.is_string()) {
        if (auto d = parse_double(j.get<std::string>())) return Value{*d};
      }
      return std::nullopt;
    case ValueType::string_list: {
      if (!j.is_array()) return std::nullopt;
      StringList out;
      out.reserve(j.size());
      for (const auto& e : j) {
        if (!e.is_string()) return std::nullopt;
        out.push_back(e.get<std::string>());
      }
      return Value{std::move(out)};
    }
  }
  return std::nullopt;
}

std::string value_repr(const Value& v) {
  return value_to_json(v).dump();
}

}  // namespace ctxguard
