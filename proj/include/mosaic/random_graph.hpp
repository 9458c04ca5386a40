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
#include <cstdint>

#include "mosaic/common.hpp"
#include "mosaic/graph.hpp"

namespace mosaic::random_graph {

struct Options {
  std::size_t min_tensors = 1;
  std::size_t max_tensors = 64;  // bounds the number of storage groups
  Bytes max_bytes = 4096;
  std::size_t max_inputs = 3;
  double in_place_prob = 0.15;
  double alias_prob = 0.05;
  double graph_input_prob = 0.1;
  double barrier_prob = 0.05;
};

/// Seeded symbol-free template: ops produce one or two tensors each, read up
/// to max_inputs earlier ones, and occasionally write in place or alias.
graph::GraphTemplate random_template(std::uint64_t seed, const Options& options = {});

graph::ConcreteGraph random_graph(std::uint64_t seed, const Options& options = {});

}  // namespace mosaic::random_graph
