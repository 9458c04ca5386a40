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

#include <cstdint>
#include <map>
#include <optional>

#include "json.hpp"
#include "mosaic/common.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/liveness.hpp"
#include "mosaic/planner.hpp"

namespace mosaic::chunker {

struct ChunkConfig {
  std::int64_t k_logits = 1;
  std::int64_t k_ffn = 1;

  std::int64_t& knob(Component c) { return c == Component::logits ? k_logits : k_ffn; }
  std::int64_t knob(Component c) const { return c == Component::logits ? k_logits : k_ffn; }
  friend bool operator==(const ChunkConfig&, const ChunkConfig&) = default;
};

struct PeakReport {
  Bytes total_peak = 0;  // planned workspace size
  Bytes max_live = 0;
  std::size_t peak_position = 0;  // last argmax of the live profile
  Component bottleneck = Component::other;  // largest component live at peak_position
  std::map<Component, Bytes> at_peak;          // live bytes per component at peak_position
  std::map<Component, Bytes> component_peaks;  // max over the timeline, per component
  Bytes floor = 0;  // max over the timeline of non-chunkable live bytes
  std::size_t group_count = 0;
};

/// Attribution over an already analyzed and planned table.
PeakReport attribute(const liveness::LifetimeTable& table, const planner::MemoryPlan& plan);

/// Instantiates with `bindings` plus the config's K_logits / K_FFN, runs
/// liveness and first-fit, and attributes the peak.
PeakReport evaluate_peak(const graph::GraphTemplate& tpl, Bindings bindings, ChunkConfig config,
                         Bytes alignment = planner::kDefaultAlignment);

struct SearchOutcome {
  std::optional<ChunkConfig> config;  // nullopt when infeasible
  std::size_t evaluations = 0;
  Bytes final_peak = 0;
  Bytes floor = 0;
  bool feasible() const { return config.has_value(); }
};

struct SearchOptions {
  Bytes alignment = planner::kDefaultAlignment;
  // Upper bound on either chunk count; 0 derives it from the largest chunked
  // extent (beyond which more chunks cannot shrink anything).
  std::int64_t k_limit = 0;
};

/// Lazy bottleneck-driven search. Starts unchunked; while the planned peak
/// exceeds the budget, adds one chunk to the component that dominates the
/// peak instant. Gives up when the non-chunkable floor already exceeds the
/// budget or no chunkable component live at the peak can be split further.
SearchOutcome search_bottleneck(const graph::GraphTemplate& tpl, const Bindings& bindings,
                                Bytes budget, const SearchOptions& options = {});

enum class Objective { sum, max };

/// Evaluates every (k_logits, k_ffn) in [1, k_max]^2 and returns the
/// feasible config minimizing the objective, ties broken lexicographically.
SearchOutcome search_bruteforce(const graph::GraphTemplate& tpl, const Bindings& bindings,
                                Bytes budget, std::int64_t k_max = 64,
                                Objective objective = Objective::sum,
                                Bytes alignment = planner::kDefaultAlignment);

/// Largest useful chunk count for `trip_symbol` under `bindings`: the largest
/// extent divided by it, or 1 when nothing is.
std::int64_t chunk_cap(const graph::GraphTemplate& tpl, const Bindings& bindings,
                       const std::string& trip_symbol);

/// Abstract launch-overhead score of a config: (k_logits + k_ffn - 2) * epsilon.
double overhead_score(ChunkConfig config, double epsilon);

/// {k_logits, k_ffn, evaluations, final_peak, floor, feasible}
nlohmann::json to_json(const SearchOutcome& outcome);

}  // namespace mosaic::chunker
