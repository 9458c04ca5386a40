// Copyright 2026 The Mosaic Authors
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

// Independent reference computations for tests. Deliberately naive.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "mosaic/graph.hpp"
#include "mosaic/liveness.hpp"

namespace oracle {

using mosaic::Bytes;

// max over t of the bytes of groups whose interval contains t.
inline Bytes max_live(const mosaic::liveness::LifetimeTable& t) {
  Bytes best = 0;
  std::size_t end = 0;
  for (const auto& g : t.groups) end = std::max(end, g.last_use + 1);
  for (std::size_t x = 0; x < end; ++x) {
    Bytes sum = 0;
    for (const auto& g : t.groups) {
      if (g.def <= x && x <= g.last_use) sum += g.size;
    }
    best = std::max(best, sum);
  }
  return best;
}

struct Interval {
  Bytes size = 0;
  std::size_t def = 0;
  std::size_t last = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Groups keyed by their sorted member list, computed by label propagation
// over the links and a direct scan of the unrolled op list.
inline std::map<std::vector<std::size_t>, Interval> lifetimes(const mosaic::graph::ConcreteGraph& g) {
  const std::size_t n = g.instances.size();
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& l : g.links) {
      const auto m = std::min(label[l.a], label[l.b]);
      if (label[l.a] != m || label[l.b] != m) {
        label[l.a] = label[l.b] = m;
        changed = true;
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.tensors[g.instances[i].tensor].graph_input) members[label[i]].push_back(i);
  }
  std::map<std::vector<std::size_t>, Interval> out;
  for (const auto& [_, m] : members) {
    Interval iv;
    bool seen = false;
    for (std::size_t t = 0; t < g.ops.size(); ++t) {
      for (const auto* list : {&g.ops[t].inputs, &g.ops[t].outputs}) {
        for (const auto i : *list) {
          if (std::find(m.begin(), m.end(), i) == m.end()) continue;
          if (!seen) iv.def = t;
          seen = true;
          iv.last = std::max(iv.last, t);
        }
      }
    }
    for (const auto& f : g.floors) {
      if (std::find(m.begin(), m.end(), f.instance) != m.end()) iv.last = std::max(iv.last, f.position);
    }
    for (const auto i : m) iv.size = std::max(iv.size, g.tensors[g.instances[i].tensor].bytes);
    if (seen) out[m] = iv;
  }
  return out;
}

// Minimum workspace over all placement orders, each group dropped onto the
// highest lifetime-overlapping group placed before it. Exponential.
inline Bytes optimal_workspace(const mosaic::liveness::LifetimeTable& t) {
  std::vector<std::size_t> order;
  for (const auto& g : t.groups) {
    if (g.size > 0) order.push_back(g.id);
  }
  Bytes best = 0;
  for (const auto& g : t.groups) best += g.size;
  std::vector<Bytes> off(t.groups.size(), 0);
  do {
    Bytes height = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& g = t.groups[order[k]];
      Bytes o = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& p = t.groups[order[j]];
        if (p.def <= g.last_use && g.def <= p.last_use) o = std::max(o, off[p.id] + p.size);
      }
      off[g.id] = o;
      height = std::max(height, o + g.size);
    }
    best = std::min(best, height);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace oracle
