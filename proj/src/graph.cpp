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

#include "mosaic/graph.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace mosaic::graph {

namespace {

void require_id(const std::string& id, const char* what) {
  if (id.empty()) throw BuildError(std::string(what) + " id must not be empty");
}

}  // namespace

GraphTemplate::GraphTemplate(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  std::set<std::string> seen;
  for (const auto& s : symbols_) {
    if (s.empty()) throw BuildError("empty symbol name");
    if (!seen.insert(s).second) throw BuildError("duplicate symbol '" + s + "'");
  }
}

void GraphTemplate::require_mutable() const {
  if (frozen_) throw BuildError("template is frozen");
}

bool GraphTemplate::has_symbol(const std::string& name) const {
  return std::find(symbols_.begin(), symbols_.end(), name) != symbols_.end();
}

std::optional<std::size_t> GraphTemplate::tensor_index(const std::string& id) const {
  auto it = tensor_ids_.find(id);
  if (it == tensor_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> GraphTemplate::op_index(const std::string& id) const {
  auto it = op_ids_.find(id);
  if (it == op_ids_.end()) return std::nullopt;
  return it->second;
}

void GraphTemplate::add_tensor(TensorDecl tensor) {
  require_mutable();
  require_id(tensor.id, "tensor");
  if (tensor_ids_.count(tensor.id)) throw BuildError("duplicate tensor '" + tensor.id + "'");
  if (tensor.element_size == 0) throw BuildError("tensor '" + tensor.id + "' has zero element size");
  for (const auto& dim : tensor.shape) {
    for (const auto& s : dim.symbols()) {
      if (!has_symbol(s)) {
        throw BuildError("tensor '" + tensor.id + "' uses undeclared symbol '" + s + "'");
      }
    }
  }
  tensor_ids_.emplace(tensor.id, tensors_.size());
  tensors_.push_back(std::move(tensor));
  produced_.push_back(false);
}

std::size_t GraphTemplate::add_op(OpDecl op) {
  require_mutable();
  require_id(op.id, "op");
  if (op_ids_.count(op.id)) throw BuildError("duplicate op '" + op.id + "'");

  std::set<std::string> seen_inputs;
  for (const auto& in : op.inputs) {
    auto idx = tensor_index(in);
    if (!idx) throw BuildError("op '" + op.id + "' reads undeclared tensor '" + in + "'");
    if (!tensors_[*idx].graph_input && !produced_[*idx]) {
      throw BuildError("op '" + op.id + "' reads '" + in + "' before any op produces it");
    }
    if (!seen_inputs.insert(in).second) {
      throw BuildError("op '" + op.id + "' lists input '" + in + "' twice");
    }
  }
  std::set<std::string> seen_outputs;
  for (const auto& out : op.outputs) {
    auto idx = tensor_index(out);
    if (!idx) throw BuildError("op '" + op.id + "' writes undeclared tensor '" + out + "'");
    if (tensors_[*idx].graph_input) {
      throw BuildError("op '" + op.id + "' writes graph input '" + out + "'");
    }
    if (produced_[*idx]) {
      throw BuildError("tensor '" + out + "' is already produced by another op");
    }
    if (seen_inputs.count(out) || !seen_outputs.insert(out).second) {
      throw BuildError("op '" + op.id + "' lists output '" + out + "' twice");
    }
  }
  for (const auto& [out, in] : op.in_place) {
    if (!seen_outputs.count(out)) {
      throw BuildError("op '" + op.id + "' in-place entry names non-output '" + out + "'");
    }
    if (!seen_inputs.count(in)) {
      throw BuildError("op '" + op.id + "' in-place entry names non-input '" + in + "'");
    }
    if (tensors_[*tensor_index(in)].graph_input) {
      throw BuildError("op '" + op.id + "' cannot write in place into graph input '" + in + "'");
    }
  }
  for (const auto& out : op.outputs) produced_[*tensor_index(out)] = true;

  std::size_t index = ops_.size();
  op_ids_.emplace(op.id, index);
  ops_.push_back(std::move(op));
  return index;
}

void GraphTemplate::add_alias(AliasConstraint alias) {
  require_mutable();
  for (const auto* id : {&alias.producer, &alias.consumer}) {
    auto idx = tensor_index(*id);
    if (!idx) throw BuildError("alias references undeclared tensor '" + *id + "'");
    if (tensors_[*idx].graph_input) throw BuildError("alias references graph input '" + *id + "'");
  }
  if (alias.producer == alias.consumer) {
    throw BuildError("alias of '" + alias.producer + "' with itself");
  }
  aliases_.push_back(std::move(alias));
}

void GraphTemplate::add_barrier(Barrier barrier) {
  require_mutable();
  if (barrier.tensors.empty()) throw BuildError("barrier without tensors");
  for (const auto& t : barrier.tensors) {
    if (!tensor_index(t)) throw BuildError("barrier references undeclared tensor '" + t + "'");
  }
  if (!op_index(barrier.release_after_op)) {
    throw BuildError("barrier references unknown op '" + barrier.release_after_op + "'");
  }
  barriers_.push_back(std::move(barrier));
}

void GraphTemplate::add_chunk_loop(ChunkLoop loop) {
  require_mutable();
  auto first = op_index(loop.first_op);
  auto last = op_index(loop.last_op);
  if (!first || !last) throw BuildError("chunk loop references unknown op");
  if (*first > *last) {
    throw BuildError("chunk loop range '" + loop.first_op + "'..'" + loop.last_op +
                     "' is not a contiguous forward range");
  }
  if (!has_symbol(loop.trip_symbol)) {
    throw BuildError("unknown trip-count symbol '" + loop.trip_symbol + "'");
  }
  for (const auto& other : loops_) {
    std::size_t a = *op_index(other.first_op);
    std::size_t b = *op_index(other.last_op);
    if (*first <= b && a <= *last) throw BuildError("chunk loops overlap");
  }
  loops_.push_back(std::move(loop));
}

void GraphTemplate::freeze() {
  if (frozen_) return;
  // Position of each op's producer, for "defined outside the body" checks.
  std::vector<std::optional<std::size_t>> producer(tensors_.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    for (const auto& out : ops_[i].outputs) producer[*tensor_index(out)] = i;
  }
  for (const auto& loop : loops_) {
    std::size_t a = *op_index(loop.first_op);
    std::size_t b = *op_index(loop.last_op);
    for (std::size_t i = a; i <= b; ++i) {
      for (const auto& in : ops_[i].inputs) {
        std::size_t t = *tensor_index(in);
        if (tensors_[t].graph_input) continue;
        if (producer[t] && *producer[t] >= a && *producer[t] <= b) continue;
        bool held = std::any_of(barriers_.begin(), barriers_.end(), [&](const Barrier& bar) {
          return *op_index(bar.release_after_op) >= b &&
                 std::find(bar.tensors.begin(), bar.tensors.end(), in) != bar.tensors.end();
        });
        if (!held) {
          throw BuildError("tensor '" + in + "' is consumed across chunk loop '" + loop.first_op +
                           "'..'" + loop.last_op + "' without a barrier spanning the loop");
        }
      }
    }
  }
  frozen_ = true;
}

ConcreteGraph instantiate(const GraphTemplate& tpl, const Bindings& bindings) {
  if (!tpl.frozen()) throw InstantiationError("template must be frozen before instantiation");
  for (const auto& s : tpl.symbols()) {
    auto it = bindings.find(s);
    if (it == bindings.end()) throw InstantiationError("missing binding for symbol '" + s + "'");
    if (it->second < 0) throw InstantiationError("negative binding for symbol '" + s + "'");
  }

  ConcreteGraph g;
  const auto& decls = tpl.tensors();
  g.tensors.reserve(decls.size());
  for (const auto& d : decls) {
    ConcreteTensor t{d.id, d.element_size, d.tag, d.graph_input};
    for (const auto& dim : d.shape) {
      auto v = static_cast<Bytes>(dim.evaluate(bindings));
      if (v != 0 && t.bytes > std::numeric_limits<Bytes>::max() / v) {
        throw InstantiationError("byte size of tensor '" + d.id + "' overflows");
      }
      t.bytes *= v;
    }
    g.tensors.push_back(std::move(t));
  }

  const auto& ops = tpl.ops();
  for (const auto& op : ops) {
    for (const auto& [out, in] : op.in_place) {
      const auto& a = g.tensors[*tpl.tensor_index(out)];
      const auto& b = g.tensors[*tpl.tensor_index(in)];
      if (a.bytes != b.bytes) {
        throw InstantiationError("in-place pair '" + out + "' <- '" + in + "' in op '" + op.id +
                                 "' differs in size (" + std::to_string(a.bytes) + " vs " +
                                 std::to_string(b.bytes) + " bytes)");
      }
    }
  }
  for (const auto& al : tpl.aliases()) {
    std::size_t p = *tpl.tensor_index(al.producer);
    std::size_t c = *tpl.tensor_index(al.consumer);
    if (g.tensors[p].bytes != g.tensors[c].bytes) {
      throw InstantiationError("alias '" + al.producer + "' -> '" + al.consumer +
                               "' differs in size");
    }
    g.alias_edges.emplace_back(p, c);
  }

  // Loop trip counts, keyed by first op index.
  std::map<std::size_t, std::pair<std::size_t, std::int64_t>> loops;
  for (const auto& loop : tpl.chunk_loops()) {
    std::int64_t trips = bindings.find(loop.trip_symbol)->second;
    if (trips < 1) {
      throw InstantiationError("trip count " + loop.trip_symbol + "=" + std::to_string(trips) +
                               " must be at least 1");
    }
    loops.emplace(*tpl.op_index(loop.first_op), std::make_pair(*tpl.op_index(loop.last_op), trips));
  }

  std::vector<std::optional<std::size_t>> current(decls.size());
  std::vector<std::vector<std::size_t>> instances_of(decls.size());
  std::vector<std::vector<std::size_t>> positions_of_op(ops.size());

  auto resolve = [&](std::size_t t) {
    if (!current[t]) {
      // Only graph inputs are referenced before being produced.
      current[t] = g.instances.size();
      instances_of[t].push_back(g.instances.size());
      g.instances.push_back({t, -1});
    }
    return *current[t];
  };

  auto emit = [&](std::size_t op_index, int iteration) {
    const OpDecl& op = ops[op_index];
    OpInstance inst{op_index, iteration, op.kind, {}, {}};
    std::map<std::string, std::size_t> input_instance;
    for (const auto& in : op.inputs) {
      std::size_t idx = resolve(*tpl.tensor_index(in));
      inst.inputs.push_back(idx);
      input_instance.emplace(in, idx);
    }
    for (const auto& out : op.outputs) {
      std::size_t t = *tpl.tensor_index(out);
      std::size_t idx = g.instances.size();
      g.instances.push_back({t, iteration});
      instances_of[t].push_back(idx);
      current[t] = idx;
      inst.outputs.push_back(idx);
      if (auto it = op.in_place.find(out); it != op.in_place.end()) {
        g.links.push_back({idx, input_instance.at(it->second), StorageLink::Kind::in_place});
      }
    }
    positions_of_op[op_index].push_back(g.ops.size());
    g.ops.push_back(std::move(inst));
  };

  for (std::size_t i = 0; i < ops.size();) {
    if (auto it = loops.find(i); it != loops.end()) {
      auto [last, trips] = it->second;
      for (std::int64_t k = 0; k < trips; ++k) {
        for (std::size_t j = i; j <= last; ++j) emit(j, static_cast<int>(k));
      }
      i = last + 1;
    } else {
      emit(i, -1);
      ++i;
    }
  }

  for (const auto& [p, c] : g.alias_edges) {
    if (instances_of[p].empty()) continue;
    std::size_t anchor = instances_of[p].front();
    for (std::size_t t : {p, c}) {
      for (std::size_t idx : instances_of[t]) {
        if (idx != anchor) g.links.push_back({anchor, idx, StorageLink::Kind::alias});
      }
    }
  }

  for (const auto& bar : tpl.barriers()) {
    const auto& positions = positions_of_op[*tpl.op_index(bar.release_after_op)];
    if (positions.empty()) continue;
    std::size_t release = positions.back();
    for (const auto& id : bar.tensors) {
      for (std::size_t idx : instances_of[*tpl.tensor_index(id)]) {
        g.floors.push_back({idx, release});
      }
    }
  }
  return g;
}

}  // namespace mosaic::graph
