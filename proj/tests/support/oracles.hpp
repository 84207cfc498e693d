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

// Independent reference implementations the product code is checked
// against. Deliberately naive: correctness over speed, and no shared code
// with the implementation under test.

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ctxguard::oracle {

// --- textbook LRU with pinning ---------------------------------------------

struct LruState {
  std::vector<std::string> order;  // front = most recently used
  std::vector<std::string> evictions;
};

/// Simulates an access string against a most-recently-used list. An access
/// is insert-or-touch; on overflow the least recently used unpinned entry
/// is evicted (nothing is evicted if all residents are pinned; the access
/// then does not cache).
inline LruState lru_simulate(std::size_t capacity, const std::set<std::string>& pinned,
                             const std::vector<std::string>& accesses) {
  LruState st;
  for (const auto& app : accesses) {
    auto it = std::find(st.order.begin(), st.order.end(), app);
    if (it != st.order.end()) {
      st.order.erase(it);
      st.order.insert(st.order.begin(), app);
      continue;
    }
    if (st.order.size() >= capacity) {
      std::optional<std::size_t> victim;
      for (std::size_t i = st.order.size(); i-- > 0;) {
        if (!pinned.count(st.order[i])) {
          victim = i;
          break;
        }
      }
      if (!victim) continue;  // everything pinned: skip caching
      st.evictions.push_back(st.order[*victim]);
      st.order.erase(st.order.begin() + static_cast<std::ptrdiff_t>(*victim));
    }
    st.order.insert(st.order.begin(), app);
  }
  return st;
}

// --- set semantics ----------------------------------------------------------

inline bool subset_of(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b)
      if (x == y) found = true;
    if (!found) return false;
  }
  return true;
}

inline bool member(const std::string& x, const std::vector<std::string>& list) {
  for (const auto& y : list)
    if (x == y) return true;
  return false;
}

// --- conjunction over rule outcomes ----------------------------------------

/// true iff every rule outcome is true (the policy conjunction).
inline bool conjunction(const std::vector<bool>& outcomes) {
  for (bool b : outcomes)
    if (!b) return false;
  return true;
}

// --- counting over decision lists -------------------------------------------

struct Counts {
  std::size_t attacks = 0, attacks_allowed = 0;
  std::size_t benign = 0, benign_allowed = 0;
};

template <typename Row>
Counts count_decisions(const std::vector<Row>& rows) {
  Counts c;
  for (const auto& r : rows) {
    bool allowed = r.final_verdict == "allow";
    if (r.label == "attack") {
      ++c.attacks;
      if (allowed) ++c.attacks_allowed;
    } else {
      ++c.benign;
      if (allowed) ++c.benign_allowed;
    }
  }
  return c;
}

}  // namespace ctxguard::oracle
