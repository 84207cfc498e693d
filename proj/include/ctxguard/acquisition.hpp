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

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "ctxguard/space.hpp"
#include "ctxguard/value.hpp"

namespace ctxguard {

/// Per-source context resolvers. A resolver returns the current value for a
/// context or nullopt when the value is unavailable (the entry is then left
/// unset, which evaluates as unknown and blocks conservatively).
class AcquisitionProviders {
 public:
  using Resolver = std::function<std::optional<Value>(const ContextMetadata&)>;

  void set(Source src, Resolver resolver) { resolvers_[src] = std::move(resolver); }
  const Resolver* find(Source src) const {
    auto it = resolvers_.find(src);
    return it == resolvers_.end() ? nullptr : &it->second;
  }

 private:
  std::map<Source, Resolver> resolvers_;
};

/// Static key-value resolver backed by a JSON object mapping acquisition
/// descriptors (falling back to ctx_id) to values. Bound to system_api and
/// system_cli.
AcquisitionProviders fixture_acquisition(const nlohmann::json& kv);
AcquisitionProviders fixture_acquisition_from_file(const std::string& path);

/// Resolver that executes the metadata's acquisition command and parses its
/// stdout as the declared type (string_list: one item per line).
AcquisitionProviders::Resolver cli_resolver();

}  // namespace ctxguard
