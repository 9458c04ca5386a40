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

#include "mosaic/liveness.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace mosaic::liveness {

namespace {

std::size_t component_slot(Component c) { return static_cast<std::size_t>(c); }

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

void check_alias_cycles(const graph::ConcreteGraph& g) {
  std::size_t n = g.tensors.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [p, c] : g.alias_edges) succ[p].push_back(c);
  enum : char { white, grey, black };
  std::vector<char> color(n, white);
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root] != white) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < succ[node].size()) {
        std::size_t s = succ[node][next++];
        if (color[s] == grey) {
          throw AnalysisError("alias cycle through tensor '" + g.tensors[s].id + "'");
        }
        if (color[s] == white) {
          color[s] = grey;
          stack.emplace_back(s, 0);
        }
      } else {
        color[node] = black;
        stack.pop_back();
      }
    }
  }
}

}  // namespace

LifetimeTable analyze(const graph::ConcreteGraph& g) {
  check_alias_cycles(g);

  const std::size_t n = g.instances.size();
  DisjointSets sets(n);
  for (const auto& link : g.links) sets.unite(link.a, link.b);

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> def(n, kNone);
  std::vector<std::size_t> last(n, 0);
  for (std::size_t t = 0; t < g.ops.size(); ++t) {
    for (std::size_t i : g.ops[t].outputs) {
      if (def[i] == kNone) def[i] = t;
      last[i] = std::max(last[i], t);
    }
    for (std::size_t i : g.ops[t].inputs) last[i] = std::max(last[i], t);
  }
  for (const auto& f : g.floors) last[f.instance] = std::max(last[f.instance], f.position);

  // A group containing any graph input lives outside the workspace.
  std::vector<bool> external(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.tensors[g.instances[i].tensor].graph_input) external[sets.find(i)] = true;
  }

  LifetimeTable table;
  table.timeline_length = g.ops.size();
  table.group_of_instance.assign(n, std::nullopt);
  std::vector<std::size_t> group_of_root(n, kNone);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t i : order) {
    std::size_t root = sets.find(i);
    if (external[root] || def[i] == kNone) continue;
    if (group_of_root[root] == kNone) {
      group_of_root[root] = table.groups.size();
      StorageGroup grp;
      grp.def = def[i];
      grp.last_use = last[i];
      table.groups.push_back(grp);
    }
    StorageGroup& grp = table.groups[group_of_root[root]];
    const auto& tensor = g.tensors[g.instances[i].tensor];
    grp.members.push_back(i);
    if (grp.members.size() == 1 || tensor.bytes > grp.size) grp.tag = tensor.tag;
    grp.size = std::max(grp.size, tensor.bytes);
    grp.def = std::min(grp.def, def[i]);
    grp.last_use = std::max(grp.last_use, last[i]);
    table.group_of_instance[i] = group_of_root[root];
  }

  // Stable ids: order groups by definition, then by first member.
  std::vector<std::size_t> perm(table.groups.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = table.groups[a];
    const auto& y = table.groups[b];
    if (x.def != y.def) return x.def < y.def;
    return x.members.front() < y.members.front();
  });
  std::vector<std::size_t> new_id(perm.size());
  std::vector<StorageGroup> sorted;
  sorted.reserve(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    new_id[perm[k]] = k;
    sorted.push_back(std::move(table.groups[perm[k]]));
    sorted.back().id = k;
  }
  table.groups = std::move(sorted);
  for (auto& gid : table.group_of_instance) {
    if (gid) gid = new_id[*gid];
  }
  return table;
}

LifetimeTable table_from_intervals(const std::vector<StorageGroup>& groups) {
  LifetimeTable table;
  table.groups = groups;
  for (std::size_t i = 0; i < table.groups.size(); ++i) {
    auto& g = table.groups[i];
    g.id = i;
    if (g.def > g.last_use) throw AnalysisError("group " + std::to_string(i) + " ends before it starts");
    table.timeline_length = std::max(table.timeline_length, g.last_use + 1);
  }
  return table;
}

std::vector<Bytes> live_profile(const LifetimeTable& table) {
  // Difference array over positions.
  std::vector<Bytes> add(table.timeline_length + 1, 0);
  std::vector<Bytes> sub(table.timeline_length + 1, 0);
  for (const auto& g : table.groups) {
    add[g.def] += g.size;
    sub[g.last_use + 1] += g.size;
  }
  std::vector<Bytes> out(table.timeline_length, 0);
  Bytes cur = 0;
  for (std::size_t t = 0; t < table.timeline_length; ++t) {
    cur = cur + add[t] - sub[t];
    out[t] = cur;
  }
  return out;
}

std::vector<std::array<Bytes, 5>> component_profile(const LifetimeTable& table) {
  std::vector<std::array<Bytes, 5>> delta(table.timeline_length + 1, std::array<Bytes, 5>{});
  std::vector<std::array<Bytes, 5>> gone(table.timeline_length + 1, std::array<Bytes, 5>{});
  for (const auto& g : table.groups) {
    delta[g.def][component_slot(g.tag)] += g.size;
    gone[g.last_use + 1][component_slot(g.tag)] += g.size;
  }
  std::vector<std::array<Bytes, 5>> out(table.timeline_length);
  std::array<Bytes, 5> cur{};
  for (std::size_t t = 0; t < table.timeline_length; ++t) {
    for (std::size_t c = 0; c < 5; ++c) cur[c] = cur[c] + delta[t][c] - gone[t][c];
    out[t] = cur;
  }
  return out;
}

Bytes max_live(const LifetimeTable& table) {
  auto profile = live_profile(table);
  return profile.empty() ? 0 : *std::max_element(profile.begin(), profile.end());
}

void write_csv(std::ostream& os, const LifetimeTable& table) {
  os << "group_id,size_bytes,def,last_use,tag\n";
  for (const auto& g : table.groups) {
    os << g.id << ',' << g.size << ',' << g.def << ',' << g.last_use << ',' << to_string(g.tag)
       << '\n';
  }
}

}  // namespace mosaic::liveness
