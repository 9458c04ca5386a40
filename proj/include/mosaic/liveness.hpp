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

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "mosaic/common.hpp"
#include "mosaic/graph.hpp"

namespace mosaic::liveness {

/// Tensor instances that share one storage range: the connected components of
/// the in-place and alias relations.
struct StorageGroup {
  std::size_t id = 0;
  std::vector<std::size_t> members;  // instance indices, ascending
  Bytes size = 0;
  Component tag = Component::other;
  std::size_t def = 0;       // inclusive timeline positions
  std::size_t last_use = 0;

  bool live_at(std::size_t t) const { return def <= t && t <= last_use; }
  bool overlaps(const StorageGroup& o) const { return def <= o.last_use && o.def <= last_use; }
};

struct LifetimeTable {
  std::vector<StorageGroup> groups;  // group.id == index
  std::size_t timeline_length = 0;
  // Per instance of the analyzed graph; empty for graph inputs.
  std::vector<std::optional<std::size_t>> group_of_instance;
};

/// Builds storage groups and their [def, last_use] intervals over the op
/// timeline. Each op position keeps its inputs and outputs live; barrier
/// floors extend last uses. Graph inputs are excluded. Throws AnalysisError
/// on an alias cycle.
LifetimeTable analyze(const graph::ConcreteGraph& g);

/// Builds a table straight from (size, def, last_use, tag) tuples.
LifetimeTable table_from_intervals(const std::vector<StorageGroup>& groups);

/// Live bytes at every timeline position.
std::vector<Bytes> live_profile(const LifetimeTable& table);
/// Live bytes at every position, split by component.
std::vector<std::array<Bytes, 5>> component_profile(const LifetimeTable& table);

/// max over t of the bytes of groups live at t; 0 for an empty table.
Bytes max_live(const LifetimeTable& table);

/// CSV rows: group_id,size_bytes,def,last_use,tag
void write_csv(std::ostream& os, const LifetimeTable& table);

}  // namespace mosaic::liveness
