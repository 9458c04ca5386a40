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

#include "mosaic/chunker.hpp"

#include <algorithm>
#include <limits>

namespace mosaic::chunker {

namespace {

const char* trip_symbol(Component c) {
  return c == Component::logits ? graph::kLogitsTrip : graph::kFfnTrip;
}

Bindings with_config(Bindings bindings, ChunkConfig config) {
  bindings[graph::kLogitsTrip] = config.k_logits;
  bindings[graph::kFfnTrip] = config.k_ffn;
  return bindings;
}

}  // namespace

PeakReport attribute(const liveness::LifetimeTable& table, const planner::MemoryPlan& plan) {
  PeakReport r;
  r.total_peak = plan.workspace_size;
  r.group_count = table.groups.size();
  for (Component c : kAllComponents) {
    r.at_peak[c] = 0;
    r.component_peaks[c] = 0;
  }
  auto by_component = liveness::component_profile(table);
  for (std::size_t t = 0; t < by_component.size(); ++t) {
    Bytes total = 0;
    Bytes fixed = 0;
    for (Component c : kAllComponents) {
      Bytes b = by_component[t][static_cast<std::size_t>(c)];
      total += b;
      if (!is_chunkable(c)) fixed += b;
      r.component_peaks[c] = std::max(r.component_peaks[c], b);
    }
    r.floor = std::max(r.floor, fixed);
    if (total >= r.max_live) {
      r.max_live = total;
      r.peak_position = t;
    }
  }
  if (!by_component.empty()) {
    Bytes best = 0;
    for (Component c : kAllComponents) {
      Bytes b = by_component[r.peak_position][static_cast<std::size_t>(c)];
      r.at_peak[c] = b;
      if (b > best) {
        best = b;
        r.bottleneck = c;
      }
    }
  }
  return r;
}

PeakReport evaluate_peak(const graph::GraphTemplate& tpl, Bindings bindings, ChunkConfig config,
                         Bytes alignment) {
  auto g = graph::instantiate(tpl, with_config(std::move(bindings), config));
  auto table = liveness::analyze(g);
  auto plan = planner::plan_first_fit(table, alignment);
  return attribute(table, plan);
}

std::int64_t chunk_cap(const graph::GraphTemplate& tpl, const Bindings& bindings,
                       const std::string& trip) {
  std::int64_t cap = 1;
  for (const auto& t : tpl.tensors()) {
    for (const auto& dim : t.shape) {
      for (const auto& num : dim.ceil_numerators_over(trip)) {
        cap = std::max(cap, num.evaluate(bindings));
      }
    }
  }
  return cap;
}

SearchOutcome search_bottleneck(const graph::GraphTemplate& tpl, const Bindings& bindings,
                                Bytes budget, const SearchOptions& options) {
  if (budget == 0) throw UsageError("budget must be positive");
  auto cap_for = [&](Component c) {
    Bindings b = with_config(bindings, {});
    std::int64_t natural = chunk_cap(tpl, b, trip_symbol(c));
    return options.k_limit > 0 ? std::min(natural, options.k_limit) : natural;
  };
  const std::int64_t cap_logits = cap_for(Component::logits);
  const std::int64_t cap_ffn = cap_for(Component::ffn);
  auto cap = [&](Component c) { return c == Component::logits ? cap_logits : cap_ffn; };

  SearchOutcome out;
  ChunkConfig config;
  while (true) {
    PeakReport r = evaluate_peak(tpl, bindings, config, options.alignment);
    ++out.evaluations;
    out.final_peak = r.total_peak;
    if (out.evaluations == 1) {
      out.floor = r.floor;
      if (r.floor > budget) return out;
    }
    if (r.total_peak <= budget) {
      out.config = config;
      return out;
    }
    std::optional<Component> target;
    if (is_chunkable(r.bottleneck) && config.knob(r.bottleneck) < cap(r.bottleneck)) {
      target = r.bottleneck;
    } else {
      // The dominant component at the peak cannot be split; fall back to the
      // largest chunkable one still live there.
      Bytes best = 0;
      for (Component c : {Component::logits, Component::ffn}) {
        if (r.at_peak[c] > best && config.knob(c) < cap(c)) {
          best = r.at_peak[c];
          target = c;
        }
      }
    }
    if (!target) return out;
    ++config.knob(*target);
  }
}

SearchOutcome search_bruteforce(const graph::GraphTemplate& tpl, const Bindings& bindings,
                                Bytes budget, std::int64_t k_max, Objective objective,
                                Bytes alignment) {
  if (budget == 0) throw UsageError("budget must be positive");
  if (k_max < 1) throw UsageError("k_max must be at least 1");
  auto score = [&](ChunkConfig c) {
    return objective == Objective::sum ? c.k_logits + c.k_ffn : std::max(c.k_logits, c.k_ffn);
  };
  SearchOutcome out;
  std::int64_t best_score = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t kl = 1; kl <= k_max; ++kl) {
    for (std::int64_t kf = 1; kf <= k_max; ++kf) {
      ChunkConfig c{kl, kf};
      PeakReport r = evaluate_peak(tpl, bindings, c, alignment);
      ++out.evaluations;
      if (kl == 1 && kf == 1) {
        out.floor = r.floor;
        out.final_peak = r.total_peak;
      }
      // Iteration order is lexicographic, so strict improvement keeps the
      // lexicographically smallest config among equal scores.
      if (r.total_peak <= budget && score(c) < best_score) {
        best_score = score(c);
        out.config = c;
        out.final_peak = r.total_peak;
      }
    }
  }
  return out;
}

double overhead_score(ChunkConfig config, double epsilon) {
  return static_cast<double>(config.k_logits + config.k_ffn - 2) * epsilon;
}

nlohmann::json to_json(const SearchOutcome& o) {
  nlohmann::json j;
  if (o.config) {
    j["k_logits"] = o.config->k_logits;
    j["k_ffn"] = o.config->k_ffn;
  } else {
    j["k_logits"] = nullptr;
    j["k_ffn"] = nullptr;
  }
  j["evaluations"] = o.evaluations;
  j["final_peak"] = o.final_peak;
  j["floor"] = o.floor;
  j["feasible"] = o.feasible();
  return j;
}

}  // namespace mosaic::chunker
