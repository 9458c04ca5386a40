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

#include "mosaic/planner.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace mosaic::planner {

using liveness::LifetimeTable;
using liveness::StorageGroup;

namespace {

void check_alignment(Bytes alignment) {
  if (!is_power_of_two(alignment)) {
    throw UsageError("alignment " + std::to_string(alignment) + " is not a power of two");
  }
}

struct Range {
  Bytes begin;
  Bytes end;
};

// Lowest aligned offset >= 0 where [offset, offset+size) avoids all `busy`
// ranges; `busy` must be sorted by begin.
Bytes lowest_fit(const std::vector<Range>& busy, Bytes size, Bytes alignment) {
  Bytes candidate = 0;
  for (const auto& r : busy) {
    if (r.end <= candidate) continue;
    if (candidate + size <= r.begin) break;
    candidate = align_up(r.end, alignment);
  }
  return candidate;
}

}  // namespace

MemoryPlan plan_first_fit(const LifetimeTable& table, Bytes alignment) {
  check_alignment(alignment);
  const auto& groups = table.groups;
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = groups[a];
    const auto& y = groups[b];
    if (x.def != y.def) return x.def < y.def;
    if (x.size != y.size) return x.size > y.size;
    return x.id < y.id;
  });

  MemoryPlan plan;
  plan.alignment = alignment;
  plan.offsets.assign(groups.size(), 0);
  std::vector<std::size_t> placed;
  placed.reserve(groups.size());
  std::vector<Range> busy;
  for (std::size_t gi : order) {
    const StorageGroup& g = groups[gi];
    if (g.size > 0) {
      busy.clear();
      for (std::size_t pi : placed) {
        const StorageGroup& p = groups[pi];
        if (p.overlaps(g)) busy.push_back({plan.offsets[pi], plan.offsets[pi] + p.size});
      }
      std::sort(busy.begin(), busy.end(),
                [](const Range& a, const Range& b) { return a.begin < b.begin; });
      plan.offsets[gi] = lowest_fit(busy, g.size, alignment);
      plan.workspace_size = std::max(plan.workspace_size, plan.offsets[gi] + g.size);
      placed.push_back(gi);
    }
  }
  return plan;
}

namespace {

class ExactSearch {
 public:
  ExactSearch(const LifetimeTable& table, Bytes alignment)
      : groups_(table.groups), alignment_(alignment), lower_bound_(liveness::max_live(table)) {
    for (const auto& g : groups_) {
      if (g.size > 0) active_.push_back(g.id);
    }
    // Initial incumbent: everything stacked, which is always valid.
    best_.assign(groups_.size(), 0);
    Bytes top = 0;
    for (std::size_t gi : active_) {
      best_[gi] = top;
      top = align_up(top + groups_[gi].size, alignment_);
    }
    best_size_ = 0;
    for (std::size_t gi : active_) best_size_ = std::max(best_size_, best_[gi] + groups_[gi].size);
    offsets_.assign(groups_.size(), 0);
    placed_.assign(groups_.size(), false);
  }

  MemoryPlan run() {
    if (best_size_ > lower_bound_) dfs(0, 0, 0, 0);
    MemoryPlan plan;
    plan.alignment = alignment_;
    plan.offsets = best_;
    plan.workspace_size = best_size_;
    return plan;
  }

 private:
  // `floor`: offset of the previously placed group (offsets never decrease);
  // `floor_id`: tie-break so equal offsets are taken in ascending id order.
  void dfs(std::size_t depth, Bytes height, Bytes floor, std::size_t floor_id) {
    if (done_) return;
    if (depth == active_.size()) {
      if (height < best_size_) {
        best_size_ = height;
        best_ = offsets_;
        if (best_size_ <= lower_bound_) done_ = true;
      }
      return;
    }
    // Every remaining group lands at or above `floor`.
    Bytes bound = std::max(height, lower_bound_);
    for (std::size_t gi : active_) {
      if (!placed_[gi]) bound = std::max(bound, floor + groups_[gi].size);
    }
    if (bound >= best_size_) return;

    struct Candidate {
      Bytes offset;
      std::size_t id;
    };
    std::vector<Candidate> candidates;
    for (std::size_t gi : active_) {
      if (placed_[gi]) continue;
      Bytes top = 0;
      for (std::size_t pi : active_) {
        if (placed_[pi] && groups_[pi].overlaps(groups_[gi])) {
          top = std::max(top, offsets_[pi] + groups_[pi].size);
        }
      }
      Bytes offset = align_up(top, alignment_);
      if (offset < floor || (offset == floor && depth > 0 && gi < floor_id)) continue;
      if (offset + groups_[gi].size >= best_size_) continue;
      candidates.push_back({offset, gi});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.offset != b.offset) return a.offset < b.offset;
      return a.id < b.id;
    });
    for (const auto& c : candidates) {
      placed_[c.id] = true;
      offsets_[c.id] = c.offset;
      dfs(depth + 1, std::max(height, c.offset + groups_[c.id].size), c.offset, c.id);
      placed_[c.id] = false;
      if (done_) return;
    }
  }

  const std::vector<StorageGroup>& groups_;
  Bytes alignment_;
  Bytes lower_bound_;
  std::vector<std::size_t> active_;
  std::vector<Bytes> offsets_;
  std::vector<bool> placed_;
  std::vector<Bytes> best_;
  Bytes best_size_ = 0;
  bool done_ = false;
};

}  // namespace

MemoryPlan plan_exact(const LifetimeTable& table, Bytes alignment, std::size_t limit) {
  check_alignment(alignment);
  if (table.groups.size() > limit) {
    throw TooLarge("exact planning is limited to " + std::to_string(limit) + " groups, got " +
                   std::to_string(table.groups.size()));
  }
  return ExactSearch(table, alignment).run();
}

std::string Violation::describe() const {
  switch (kind) {
    case Kind::overlap:
      return "groups " + std::to_string(group_a) + " and " + std::to_string(group_b) +
             " are live together and share bytes";
    case Kind::misaligned:
      return "group " + std::to_string(group_a) + " has a misaligned offset";
    case Kind::out_of_range:
      return "group " + std::to_string(group_a) + " extends past the workspace";
  }
  return {};
}

ValidationReport validate(const MemoryPlan& plan, const LifetimeTable& table) {
  const auto& groups = table.groups;
  if (plan.offsets.size() != groups.size()) {
    throw ValidationError("plan covers " + std::to_string(plan.offsets.size()) + " groups, table has " +
                          std::to_string(groups.size()));
  }
  ValidationReport report;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (plan.alignment > 1 && plan.offsets[i] % plan.alignment != 0) {
      report.violations.push_back({Violation::Kind::misaligned, i, i});
    }
    if (groups[i].size > 0 && plan.offsets[i] + groups[i].size > plan.workspace_size) {
      report.violations.push_back({Violation::Kind::out_of_range, i, i});
    }
  }
  // Sweep in def order; only groups still live can conflict.
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return groups[a].def != groups[b].def ? groups[a].def < groups[b].def : a < b;
  });
  std::vector<std::size_t> open;
  for (std::size_t gi : order) {
    const auto& g = groups[gi];
    std::erase_if(open, [&](std::size_t o) { return groups[o].last_use < g.def; });
    if (g.size == 0) continue;
    Bytes begin = plan.offsets[gi];
    Bytes end = begin + g.size;
    for (std::size_t o : open) {
      Bytes ob = plan.offsets[o];
      Bytes oe = ob + groups[o].size;
      if (begin < oe && ob < end) {
        report.violations.push_back({Violation::Kind::overlap, std::min(o, gi), std::max(o, gi)});
      }
    }
    open.push_back(gi);
  }
  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) {
              return std::tie(a.group_a, a.group_b, a.kind) < std::tie(b.group_a, b.group_b, b.kind);
            });
  return report;
}

PlanStats measure(const LifetimeTable& table, const MemoryPlan& plan,
                  std::chrono::nanoseconds elapsed) {
  return {plan.workspace_size, liveness::max_live(table), elapsed, table.groups.size()};
}

nlohmann::json to_json(const MemoryPlan& plan, const LifetimeTable& table) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : table.groups) {
    groups.push_back({{"id", g.id},
                      {"offset", plan.offsets.at(g.id)},
                      {"size", g.size},
                      {"def", g.def},
                      {"last_use", g.last_use},
                      {"tag", std::string(to_string(g.tag))}});
  }
  return {{"alignment", plan.alignment},
          {"workspace_size", plan.workspace_size},
          {"groups", std::move(groups)}};
}

}  // namespace mosaic::planner
