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

#include "ctxguard/acquisition.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace ctxguard {

AcquisitionProviders fixture_acquisition(const nlohmann::json& kv) {
  auto store = std::make_shared<nlohmann::json>(kv.is_object() ? kv : nlohmann::json::object());
  AcquisitionProviders providers;
  auto resolver = [store](const ContextMetadata& meta) -> std::optional<Value> {
    const std::string& key = meta.acquisition.empty() ? meta.ctx_id : meta.acquisition;
    auto it = store->find(key);
    if (it == store->end()) return std::nullopt;
    return value_from_json(*it, meta.type, /*coerce=*/true);
  };
  providers.set(Source::system_api, resolver);
  providers.set(Source::system_cli, resolver);
  return providers;
}

AcquisitionProviders fixture_acquisition_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return fixture_acquisition(nlohmann::json::object());
  nlohmann::json kv = nlohmann::json::parse(in, nullptr, false);
  if (kv.is_discarded()) kv = nlohmann::json::object();
  return fixture_acquisition(kv);
}

AcquisitionProviders::Resolver cli_resolver() {
  return [](const ContextMetadata& meta) -> std::optional<Value> {
    if (meta.acquisition.empty()) return std::nullopt;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(meta.acquisition.c_str(), "r"), pclose);
    if (!pipe) return std::nullopt;
    std::string output;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe.get())) output.append(buf, n);
    // Strip one trailing newline; list types split on the remaining ones.
    if (!output.empty() && output.back() == '\n') output.pop_back();
    if (meta.type == ValueType::string_list) {
      StringList items;
      std::istringstream lines(output);
      std::string line;
      while (std::getline(lines, line))
        if (!line.empty()) items.push_back(line);
      return Value{std::move(items)};
    }
    if (meta.type == ValueType::string) return Value{output};
    return value_from_json(nlohmann::json(output), meta.type, /*coerce=*/true);
  };
}

}  // namespace ctxguard
