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

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/caching_allocator.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/liveness.hpp"
#include "mosaic/vmm.hpp"
#include "mosaic/workload.hpp"

namespace mosaic::allocsim {

enum class BreakPolicy {
  layer_breaks,  // before every FFN loop and before the logits block
  none,          // the whole step is one subgraph
};

/// Timeline positions of the first instance of each op in `break_before`,
/// sorted and without position 0.
std::vector<std::size_t> break_positions(const graph::GraphTemplate& tpl, const graph::ConcreteGraph& g,
                                         const std::vector<std::string>& break_before);

/// Replays one step under myopic planning. Each subgraph first-fit plans the
/// groups that live entirely inside it into one arena, allocated when the
/// subgraph starts and freed when it ends. Groups that cross a break are
/// allocated on their own at definition and freed after the subgraph of
/// their last use.
void replay_myopic_step(CachingAllocator& alloc, const liveness::LifetimeTable& table,
                        const std::vector<std::size_t>& breaks, Bytes alignment);

struct StepInflation {
  std::int64_t step = 0;
  std::int64_t masked = 0;
  Bytes reserved_peak = 0;     // allocator reservation after this step
  Bytes theoretical_peak = 0;  // global plan of this step
  double inflation_rate = 0.0;
};

struct InflationReport {
  std::string pipeline;
  Bytes reserved_peak = 0;
  Bytes theoretical_peak = 0;  // max over steps of the global plan
  double inflation_rate = 0.0;
  std::vector<StepInflation> steps;
  std::size_t segments_created = 0;
  std::size_t events = 0;
};

struct RunOptions {
  BreakPolicy policy = BreakPolicy::layer_breaks;
  AllocatorConfig allocator;
  Bytes page_size = vmm::kDevicePage;
  vmm::Backend backend = vmm::Backend::simulated;
};

/// Myopic planning on a caching allocator over every diffusion step of the
/// scenario (unchunked unless the scenario carries a budget). The allocator
/// is returned through `final_state` when given.
InflationReport run_myopic(const workload::ModelConfig& cfg, const workload::ScenarioConfig& scen,
                           const RunOptions& options = {}, CachingAllocator* final_state = nullptr);

/// The same steps through the global planner and a vmm workspace committed to
/// each step's plan.
InflationReport run_global(const workload::ModelConfig& cfg, const workload::ScenarioConfig& scen,
                           const RunOptions& options = {});

nlohmann::json to_json(const InflationReport& report);

std::string_view to_string(BreakPolicy p);
BreakPolicy break_policy_from_string(std::string_view s);

}  // namespace mosaic::allocsim
