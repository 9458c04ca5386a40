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
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mosaic/common.hpp"
#include "mosaic/symbolic.hpp"

namespace mosaic::graph {

inline constexpr const char* kLogitsTrip = "K_logits";
inline constexpr const char* kFfnTrip = "K_FFN";

struct TensorDecl {
  std::string id;
  std::vector<SymExpr> shape;
  std::uint32_t element_size = 4;
  Component tag = Component::other;
  // Weights, prompt embeddings and the like: never placed in the workspace.
  bool graph_input = false;
};

/// `inputs` lists every tensor the op reads or writes into without defining
/// it (for example a preallocated destination that chunked iterations fill).
/// `in_place` maps an output id to the input id whose storage it reuses.
struct OpDecl {
  std::string id;
  std::string kind;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> in_place;
};

struct AliasConstraint {
  std::string producer;
  std::string consumer;
};

struct Barrier {
  std::vector<std::string> tensors;
  std::string release_after_op;
};

/// Ops [first_op, last_op] (inclusive, by template order) repeat
/// `trip_symbol` times. Chunked shapes inside the body spell out the split
/// explicitly, e.g. `ceil(M, K_logits)`.
struct ChunkLoop {
  std::string first_op;
  std::string last_op;
  std::string trip_symbol;
};

/// Parameterized computation graph, built once per model and instantiated
/// per request. Builders validate eagerly; `freeze()` runs the whole-graph
/// checks and makes the template immutable.
class GraphTemplate {
 public:
  /// Throws BuildError on duplicate or empty symbol names.
  explicit GraphTemplate(std::vector<std::string> symbols = {});

  void add_tensor(TensorDecl tensor);
  std::size_t add_op(OpDecl op);
  void add_alias(AliasConstraint alias);
  void add_barrier(Barrier barrier);
  void add_chunk_loop(ChunkLoop loop);

  /// Checks that every tensor consumed inside a chunk loop but defined
  /// outside it is held by a barrier released at or after the loop's last op.
  void freeze();
  bool frozen() const { return frozen_; }

  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::vector<TensorDecl>& tensors() const { return tensors_; }
  const std::vector<OpDecl>& ops() const { return ops_; }
  const std::vector<AliasConstraint>& aliases() const { return aliases_; }
  const std::vector<Barrier>& barriers() const { return barriers_; }
  const std::vector<ChunkLoop>& chunk_loops() const { return loops_; }

  std::optional<std::size_t> tensor_index(const std::string& id) const;
  std::optional<std::size_t> op_index(const std::string& id) const;
  bool has_symbol(const std::string& name) const;

 private:
  void require_mutable() const;

  std::vector<std::string> symbols_;
  std::vector<TensorDecl> tensors_;
  std::vector<OpDecl> ops_;
  std::vector<AliasConstraint> aliases_;
  std::vector<Barrier> barriers_;
  std::vector<ChunkLoop> loops_;
  std::unordered_map<std::string, std::size_t> tensor_ids_;
  std::unordered_map<std::string, std::size_t> op_ids_;
  std::vector<bool> produced_;
  bool frozen_ = false;
};

struct ConcreteTensor {
  std::string id;
  Bytes bytes = 0;
  Component tag = Component::other;
  bool graph_input = false;
};

/// One materialization of a tensor: loop bodies create a fresh instance of
/// each tensor they define on every iteration.
struct TensorInstance {
  std::size_t tensor = 0;
  int iteration = -1;  // -1 outside chunk loops
};

struct OpInstance {
  std::size_t op = 0;  // index into GraphTemplate::ops()
  int iteration = -1;
  std::string kind;
  std::vector<std::size_t> inputs;   // instance indices
  std::vector<std::size_t> outputs;  // instance indices
};

struct StorageLink {
  enum class Kind { in_place, alias };
  std::size_t a = 0;  // instance indices
  std::size_t b = 0;
  Kind kind = Kind::in_place;
};

/// The instance must stay live up to at least timeline `position`.
struct LifetimeFloor {
  std::size_t instance = 0;
  std::size_t position = 0;
};

struct ConcreteGraph {
  std::vector<ConcreteTensor> tensors;  // parallel to the template's tensors
  std::vector<TensorInstance> instances;
  std::vector<OpInstance> ops;  // timeline order
  std::vector<StorageLink> links;
  std::vector<LifetimeFloor> floors;
  // (producer, consumer) tensor indices of every alias, for cycle checks.
  std::vector<std::pair<std::size_t, std::size_t>> alias_edges;
};

/// Binds every symbol, evaluates byte sizes, unrolls chunk loops and checks
/// that in-place and alias partners agree on size. Throws InstantiationError.
ConcreteGraph instantiate(const GraphTemplate& tpl, const Bindings& bindings);

}  // namespace mosaic::graph
