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

#include "mosaic/allocsim.hpp"

#include <algorithm>
#include <map>

#include "mosaic/planner.hpp"

namespace mosaic::allocsim {

std::string_view to_string(BreakPolicy p) { return p == BreakPolicy::none ? "none" : "layer_breaks"; }

BreakPolicy break_policy_from_string(std::string_view s) {
  if (s == "none") return BreakPolicy::none;
  if (s == "layer_breaks" || s == "default") return BreakPolicy::layer_breaks;
  throw UsageError("unknown break policy '" + std::string(s) + "'");
}

std::vector<std::size_t> break_positions(const graph::GraphTemplate& tpl, const graph::ConcreteGraph& g,
                                         const std::vector<std::string>& break_before) {
  std::vector<std::size_t> out;
  for (const auto& id : break_before) {
    const auto op = tpl.op_index(id);
    if (!op) throw UsageError("break before unknown op '" + id + "'");
    for (std::size_t t = 0; t < g.ops.size(); ++t) {
      if (g.ops[t].op == *op) {
        if (t > 0) out.push_back(t);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void replay_myopic_step(CachingAllocator& alloc, const liveness::LifetimeTable& table,
                        const std::vector<std::size_t>& breaks, Bytes alignment) {
  std::vector<std::size_t> starts = {0};
  for (const auto b : breaks) {
    if (b > starts.back() && b < table.timeline_length) starts.push_back(b);
  }
  const auto subgraph_of = [&](std::size_t t) {
    return static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), t) - starts.begin()) - 1;
  };

  std::map<std::size_t, std::vector<Handle>> release_after;  // subgraph -> crossing blocks
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t begin = starts[s];
    const std::size_t end = s + 1 < starts.size() ? starts[s + 1] : table.timeline_length;

    std::vector<liveness::StorageGroup> local;
    std::vector<const liveness::StorageGroup*> crossing;
    for (const auto& grp : table.groups) {
      if (grp.size == 0 || grp.def < begin || grp.def >= end) continue;
      if (grp.last_use < end) local.push_back(grp);
      else crossing.push_back(&grp);
    }
    std::optional<Handle> arena;
    if (!local.empty()) {
      const auto sub = liveness::table_from_intervals(local);
      const Bytes size = planner::plan_first_fit(sub, alignment).workspace_size;
      if (size > 0) arena = alloc.alloc(size);
    }
    for (const auto* grp : crossing) {
      release_after[subgraph_of(grp->last_use)].push_back(alloc.alloc(grp->size));
    }
    if (arena) alloc.free(*arena);
    for (const auto h : release_after[s]) alloc.free(h);
    release_after.erase(s);
  }
}

namespace {

double rate(Bytes reserved, Bytes theoretical) {
  return theoretical > 0 ? static_cast<double>(reserved) / static_cast<double>(theoretical) - 1.0 : 0.0;
}

struct StepGraph {
  std::int64_t step;
  std::int64_t masked;
  graph::ConcreteGraph graph;
  liveness::LifetimeTable table;
  Bytes theoretical;
};

std::vector<StepGraph> step_graphs(const workload::LayerTemplate& tpl, const workload::ModelConfig& cfg,
                                   const workload::ScenarioConfig& scen) {
  std::vector<StepGraph> out;
  for (const auto& r : workload::simulate_run(cfg, scen)) {
    Bindings b = workload::step_bindings(scen.context_len, r.state.masked);
    b[graph::kLogitsTrip] = r.config.k_logits;
    b[graph::kFfnTrip] = r.config.k_ffn;
    auto g = graph::instantiate(tpl.graph, b);
    auto table = liveness::analyze(g);
    out.push_back({r.state.step, r.state.masked, std::move(g), std::move(table), r.metrics.theoretical_peak});
  }
  return out;
}

}  // namespace

InflationReport run_myopic(const workload::ModelConfig& cfg, const workload::ScenarioConfig& scen,
                           const RunOptions& options, CachingAllocator* final_state) {
  const auto tpl = workload::build_layer_template(cfg);
  CachingAllocator alloc(options.allocator);
  InflationReport report;
  report.pipeline = "myopic/" + std::string(to_string(options.policy));
  for (const auto& s : step_graphs(tpl, cfg, scen)) {
    std::vector<std::size_t> breaks;
    if (options.policy == BreakPolicy::layer_breaks) {
      breaks = break_positions(tpl.graph, s.graph, tpl.break_before);
    }
    replay_myopic_step(alloc, s.table, breaks, scen.alignment);
    report.steps.push_back({s.step, s.masked, alloc.peak_reserved(), s.theoretical,
                            rate(alloc.peak_reserved(), s.theoretical)});
    report.theoretical_peak = std::max(report.theoretical_peak, s.theoretical);
  }
  report.reserved_peak = alloc.peak_reserved();
  report.inflation_rate = rate(report.reserved_peak, report.theoretical_peak);
  report.segments_created = alloc.segments_created();
  report.events = alloc.events().size();
  if (final_state) *final_state = std::move(alloc);
  return report;
}

InflationReport run_global(const workload::ModelConfig& cfg, const workload::ScenarioConfig& scen,
                           const RunOptions& options) {
  const auto tpl = workload::build_layer_template(cfg);
  const auto steps = step_graphs(tpl, cfg, scen);
  Bytes largest = 0;
  for (const auto& s : steps) largest = std::max(largest, s.theoretical);
  auto ws = vmm::Workspace::reserve(std::max<Bytes>(largest, 1), options.page_size, options.backend);
  InflationReport report;
  report.pipeline = "global/vmm";
  for (const auto& s : steps) {
    ws.commit_to(s.theoretical);
    report.reserved_peak = std::max(report.reserved_peak, ws.committed_bytes());
    report.steps.push_back({s.step, s.masked, ws.committed_bytes(), s.theoretical,
                            rate(ws.committed_bytes(), s.theoretical)});
    report.theoretical_peak = std::max(report.theoretical_peak, s.theoretical);
  }
  report.inflation_rate = rate(report.reserved_peak, report.theoretical_peak);
  return report;
}

nlohmann::json to_json(const InflationReport& report) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"step", s.step},
                     {"masked", s.masked},
                     {"reserved_peak", s.reserved_peak},
                     {"theoretical_peak", s.theoretical_peak},
                     {"inflation_rate", s.inflation_rate}});
  }
  return {{"pipeline", report.pipeline},
          {"reserved_peak", report.reserved_peak},
          {"theoretical_peak", report.theoretical_peak},
          {"inflation_rate", report.inflation_rate},
          {"segments_created", report.segments_created},
          {"events", report.events},
          {"steps", std::move(steps)}};
}

}  // namespace mosaic::allocsim
