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

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/common.hpp"
#include "mosaic/liveness.hpp"

namespace mosaic::planner {

inline constexpr Bytes kDefaultAlignment = 256;
inline constexpr std::size_t kDefaultExactLimit = 12;

/// Byte offset of every storage group inside one contiguous workspace.
struct MemoryPlan {
  Bytes alignment = 1;
  Bytes workspace_size = 0;
  std::vector<Bytes> offsets;  // indexed by group id
};

struct PlanStats {
  Bytes workspace_size = 0;
  Bytes lower_bound = 0;  // max_live
  std::chrono::nanoseconds planning_time{0};
  std::size_t group_count = 0;
};

/// Places groups in (def asc, size desc, id asc) order at the lowest aligned
/// offset clear of every already-placed group whose lifetime overlaps.
/// Throws UsageError when `alignment` is not a power of two.
MemoryPlan plan_first_fit(const liveness::LifetimeTable& table,
                          Bytes alignment = kDefaultAlignment);

/// Minimum-workspace plan by branch and bound. Any optimal plan can be pushed
/// down until every group rests at offset 0 or on top of a lifetime-overlapping
/// group; listing such a plan by ascending offset, each group sits exactly on
/// the highest top among the overlapping groups placed before it. The search
/// enumerates those orders with non-decreasing offsets and prunes on the
/// incumbent, stopping early once the max_live lower bound is reached.
/// Throws TooLarge when the table has more than `limit` groups.
MemoryPlan plan_exact(const liveness::LifetimeTable& table, Bytes alignment = kDefaultAlignment,
                      std::size_t limit = kDefaultExactLimit);

struct Violation {
  enum class Kind { overlap, misaligned, out_of_range };
  Kind kind = Kind::overlap;
  std::size_t group_a = 0;
  std::size_t group_b = 0;  // == group_a for single-group violations
  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Lists every pair of lifetime-overlapping groups whose byte ranges
/// intersect, every misaligned offset, and any group reaching past
/// workspace_size. Throws ValidationError when the plan does not cover
/// every group.
ValidationReport validate(const MemoryPlan& plan, const liveness::LifetimeTable& table);

/// Times `plan_first_fit` (or `plan_exact`) and gathers PlanStats.
PlanStats measure(const liveness::LifetimeTable& table, const MemoryPlan& plan,
                  std::chrono::nanoseconds elapsed);

/// {alignment, workspace_size, groups: [{id, offset, size, def, last_use, tag}]}
nlohmann::json to_json(const MemoryPlan& plan, const liveness::LifetimeTable& table);

}  // namespace mosaic::planner
