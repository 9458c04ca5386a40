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

#include "mosaic/random_graph.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace mosaic::random_graph {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  // Modulo draws keep sequences identical across standard libraries.
  std::uint64_t below(std::uint64_t n) { return n ? rng_() % n : 0; }
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

graph::GraphTemplate random_template(std::uint64_t seed, const Options& options) {
  if (options.max_tensors < options.min_tensors || options.max_tensors == 0) {
    throw UsageError("random graph needs 1 <= min_tensors <= max_tensors");
  }
  Draw draw(seed);
  graph::GraphTemplate tpl;
  const std::size_t n = draw.range(std::max<std::size_t>(options.min_tensors, 1), options.max_tensors);

  struct Made {
    std::string id;
    Bytes bytes;
    bool input;
  };
  std::vector<Made> made;
  std::vector<std::string> op_ids;
  std::vector<std::size_t> producer_op;  // parallel to made
  auto declare = [&](Bytes bytes, bool input) {
    const std::string id = "t" + std::to_string(made.size());
    tpl.add_tensor({id, {SymExpr(static_cast<std::int64_t>(bytes))}, 1, Component::other, input});
    made.push_back({id, bytes, input});
    producer_op.push_back(op_ids.size());
    return made.size() - 1;
  };
  auto size = [&] {
    // Mix of tiny, aligned and odd sizes.
    switch (draw.below(4)) {
      case 0: return draw.range(0, 16);
      case 1: return draw.range(1, options.max_bytes / 256 + 1) * 256;
      default: return draw.range(1, options.max_bytes);
    }
  };

  std::size_t produced = 0;
  while (produced < n) {
    if (!made.empty() && draw.chance(options.graph_input_prob)) declare(size(), true);
    if (made.empty()) declare(size(), true);

    graph::OpDecl op;
    op.id = "op" + std::to_string(op_ids.size());
    op.kind = "k" + std::to_string(draw.below(4));
    const std::size_t want = draw.range(0, std::min(options.max_inputs, made.size()));
    std::vector<std::size_t> inputs;
    for (std::size_t i = 0; i < want; ++i) {
      // Favour recent tensors so lifetimes stay mostly short.
      const std::size_t span = std::min<std::size_t>(made.size(), draw.chance(0.7) ? 6 : made.size());
      const std::size_t pick = made.size() - 1 - draw.below(span);
      if (std::find(inputs.begin(), inputs.end(), pick) == inputs.end()) inputs.push_back(pick);
    }
    for (auto i : inputs) op.inputs.push_back(made[i].id);

    const std::size_t outs = std::min<std::size_t>(draw.range(1, 2), n - produced);
    std::vector<std::pair<std::string, std::string>> aliases;
    for (std::size_t o = 0; o < outs; ++o) {
      std::optional<std::size_t> target;
      if (!inputs.empty() && draw.chance(options.in_place_prob)) {
        const auto cand = inputs[draw.below(inputs.size())];
        if (!made[cand].input) target = cand;
      }
      Bytes bytes = size();
      std::optional<std::size_t> alias_of;
      if (!target && draw.chance(options.alias_prob)) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < made.size(); ++i) {
          if (!made[i].input) pool.push_back(i);
        }
        if (!pool.empty()) {
          alias_of = pool[draw.below(pool.size())];
          bytes = made[*alias_of].bytes;
        }
      }
      if (target) bytes = made[*target].bytes;
      const auto idx = declare(bytes, false);
      op.outputs.push_back(made[idx].id);
      if (target && !op.in_place.count(made[idx].id)) op.in_place[made[idx].id] = made[*target].id;
      if (alias_of) aliases.emplace_back(made[*alias_of].id, made[idx].id);
      ++produced;
    }
    tpl.add_op(op);
    op_ids.push_back(op.id);
    for (auto& [p, c] : aliases) tpl.add_alias({p, c});
  }

  for (std::size_t i = 0; i < made.size(); ++i) {
    if (made[i].input || !draw.chance(options.barrier_prob)) continue;
    const std::size_t from = std::min(producer_op[i], op_ids.size() - 1);
    const std::size_t release = draw.range(from, op_ids.size() - 1);
    tpl.add_barrier({{made[i].id}, op_ids[release]});
  }
  tpl.freeze();
  return tpl;
}

graph::ConcreteGraph random_graph(std::uint64_t seed, const Options& options) {
  return graph::instantiate(random_template(seed, options), {});
}

}  // namespace mosaic::random_graph
