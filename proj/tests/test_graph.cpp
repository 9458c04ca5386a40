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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "doctest.h"
#include "mosaic/graph.hpp"
#include "mosaic/graph_io.hpp"
#include "mosaic/random_graph.hpp"
#include "mosaic/workload.hpp"

using namespace mosaic;
using graph::GraphTemplate;

namespace {

SymExpr S(const char* text) { return SymExpr::parse(text); }

// x(input) -> op0 -> a -> op1 -> b
GraphTemplate chain() {
  GraphTemplate t({"L"});
  t.add_tensor({"x", {S("L")}, 4, Component::other, true});
  t.add_tensor({"a", {S("L"), S("8")}, 4, Component::hidden});
  t.add_tensor({"b", {S("L"), S("8")}, 4, Component::hidden});
  t.add_op({"op0", "matmul", {"x"}, {"a"}, {}});
  t.add_op({"op1", "relu", {"a"}, {"b"}, {}});
  return t;
}

// Every op input is a graph input or produced (or written) at an earlier position.
bool topologically_valid(const graph::ConcreteGraph& g) {
  std::vector<bool> ready(g.instances.size(), false);
  for (std::size_t i = 0; i < g.instances.size(); ++i) {
    ready[i] = g.tensors[g.instances[i].tensor].graph_input;
  }
  for (const auto& op : g.ops) {
    for (auto in : op.inputs) {
      if (!ready[in]) return false;
    }
    for (auto out : op.outputs) ready[out] = true;
  }
  return true;
}

}  // namespace

TEST_CASE("new templates") {
  GraphTemplate t({"L", "M"});
  CHECK(t.ops().empty());
  CHECK(t.tensors().empty());
  CHECK_THROWS_AS(GraphTemplate({"L", "L"}), BuildError);
}

TEST_CASE("add_op rejects dangling and forward references") {
  GraphTemplate t({"L"});
  t.add_tensor({"y", {S("L")}, 4});
  CHECK_THROWS_AS(t.add_op({"op", "k", {"x"}, {"y"}, {}}), BuildError);
  t.add_tensor({"z", {S("L")}, 4});
  CHECK_THROWS_AS(t.add_op({"op", "k", {"z"}, {"y"}, {}}), BuildError);
  t.add_op({"op", "k", {}, {"y"}, {}});
  CHECK_THROWS_AS(t.add_op({"op2", "k", {}, {"y"}, {}}), BuildError);  // produced twice
  CHECK_THROWS_AS(t.add_op({"op", "k", {}, {"z"}, {}}), BuildError);   // duplicate id
}

TEST_CASE("chain keeps insertion order") {
  auto t = chain();
  t.freeze();
  REQUIRE(t.ops().size() == 2);
  CHECK(t.ops()[0].id == "op0");
  CHECK(t.ops()[1].id == "op1");
  const auto g = graph::instantiate(t, {{"L", 10}});
  CHECK(g.tensors[1].bytes == 320);
  CHECK(g.tensors[0].graph_input);
}

TEST_CASE("in-place size mismatch surfaces at instantiation") {
  GraphTemplate t({"L", "M"});
  t.add_tensor({"a", {S("L"), S("4")}, 4});
  t.add_tensor({"b", {S("M"), S("4")}, 4});
  t.add_op({"op0", "k", {}, {"a"}, {}});
  t.add_op({"op1", "k", {"a"}, {"b"}, {{"b", "a"}}});
  t.freeze();
  CHECK_THROWS_AS(graph::instantiate(t, {{"L", 4}, {"M", 2}}), InstantiationError);
  CHECK_NOTHROW(graph::instantiate(t, {{"L", 3}, {"M", 3}}));
}

TEST_CASE("chunk loop validation") {
  GraphTemplate t({"M", "K_logits"});
  t.add_tensor({"c", {S("ceil(M, K_logits)"), S("3")}, 4});
  t.add_op({"a", "k", {}, {}, {}});
  t.add_op({"b", "k", {}, {"c"}, {}});
  CHECK_THROWS_AS(t.add_chunk_loop({"b", "a", "K_logits"}), BuildError);
  CHECK_THROWS_AS(t.add_chunk_loop({"a", "b", "K_other"}), BuildError);
  CHECK_THROWS_AS(t.add_chunk_loop({"a", "nope", "K_logits"}), BuildError);
  t.add_chunk_loop({"b", "b", "K_logits"});
  CHECK_THROWS_AS(t.add_chunk_loop({"a", "b", "K_logits"}), BuildError);  // overlaps
}

TEST_CASE("loop body tensors are instantiated per iteration") {
  GraphTemplate t({"M", "K_logits"});
  t.add_tensor({"c", {S("ceil(M, K_logits)"), S("3")}, 4, Component::logits});
  t.add_op({"pre", "k", {}, {}, {}});
  t.add_op({"body", "k", {}, {"c"}, {}});
  t.add_op({"use", "k", {"c"}, {}, {}});
  t.add_op({"post", "k", {}, {}, {}});
  t.add_chunk_loop({"body", "use", "K_logits"});
  t.freeze();
  const auto g = graph::instantiate(t, {{"M", 10}, {"K_logits", 4}});
  CHECK(g.tensors[0].bytes == 36);
  CHECK(g.ops.size() == 2 + 4 * 2);
  std::size_t chunks = 0;
  for (const auto& inst : g.instances) chunks += inst.tensor == 0;
  CHECK(chunks == 4);
  // Each iteration reads its own instance.
  CHECK(g.ops[2].inputs == g.ops[1].outputs);
  CHECK(g.ops[4].inputs == g.ops[3].outputs);
  CHECK(g.ops[1].outputs != g.ops[3].outputs);
  CHECK(g.ops[3].iteration == 1);

  CHECK_THROWS_AS(graph::instantiate(t, {{"M", 10}}), InstantiationError);
  CHECK_THROWS_AS(graph::instantiate(t, {{"M", 10}, {"K_logits", 0}}), InstantiationError);
}

TEST_CASE("K = 1 unrolling is the identity") {
  const auto tpl = workload::build_layer_template(workload::tiny_model());
  const auto g = graph::instantiate(tpl.graph, {{"L", 10}, {"M", 8}, {"K_logits", 1}, {"K_FFN", 1}});
  REQUIRE(g.ops.size() == tpl.graph.ops().size());
  for (std::size_t i = 0; i < g.ops.size(); ++i) CHECK(g.ops[i].op == i);
}

TEST_CASE("unrolled op count and topological order") {
  const auto tpl = workload::build_layer_template(workload::tiny_model());
  const auto& ops = tpl.graph.ops();
  for (const auto& [kl, kf] : {std::pair{1, 1}, std::pair{3, 2}, std::pair{5, 7}}) {
    const auto g = graph::instantiate(tpl.graph, {{"L", 10}, {"M", 8}, {"K_logits", kl}, {"K_FFN", kf}});
    std::size_t expect = ops.size();
    for (const auto& loop : tpl.graph.chunk_loops()) {
      const auto body = *tpl.graph.op_index(loop.last_op) - *tpl.graph.op_index(loop.first_op) + 1;
      const auto trips = loop.trip_symbol == graph::kLogitsTrip ? kl : kf;
      expect += body * static_cast<std::size_t>(trips - 1);
    }
    CHECK(g.ops.size() == expect);
    CHECK(topologically_valid(g));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(topologically_valid(random_graph::random_graph(seed)));
  }
}

TEST_CASE("loop-invariant inputs need a barrier") {
  GraphTemplate t({"K_FFN"});
  t.add_tensor({"h", {S("4")}, 4});
  t.add_op({"make", "k", {}, {"h"}, {}});
  t.add_op({"body", "k", {"h"}, {}, {}});
  t.add_chunk_loop({"body", "body", "K_FFN"});
  CHECK_THROWS_AS(t.freeze(), BuildError);

  GraphTemplate ok({"K_FFN"});
  ok.add_tensor({"h", {S("4")}, 4});
  ok.add_op({"make", "k", {}, {"h"}, {}});
  ok.add_op({"body", "k", {"h"}, {}, {}});
  ok.add_chunk_loop({"body", "body", "K_FFN"});
  ok.add_barrier({{"h"}, "body"});
  CHECK_NOTHROW(ok.freeze());
  CHECK_THROWS_AS(ok.add_op({"late", "k", {}, {}, {}}), BuildError);  // frozen
  GraphTemplate unfrozen = chain();
  CHECK_THROWS_AS(graph::instantiate(unfrozen, {{"L", 1}}), InstantiationError);
}

TEST_CASE("JSON round trip yields identical concrete graphs") {
  auto check = [](const GraphTemplate& tpl, const Bindings& b) {
    const auto again = graph::template_from_json(graph::to_json(tpl));
    CHECK(graph::to_json(again) == graph::to_json(tpl));
    const auto g1 = graph::instantiate(tpl, b);
    const auto g2 = graph::instantiate(again, b);
    REQUIRE(g1.tensors.size() == g2.tensors.size());
    for (std::size_t i = 0; i < g1.tensors.size(); ++i) CHECK(g1.tensors[i].bytes == g2.tensors[i].bytes);
    REQUIRE(g1.ops.size() == g2.ops.size());
    for (std::size_t i = 0; i < g1.ops.size(); ++i) {
      CHECK(g1.ops[i].inputs == g2.ops[i].inputs);
      CHECK(g1.ops[i].outputs == g2.ops[i].outputs);
    }
    CHECK(g1.links.size() == g2.links.size());
    CHECK(g1.floors.size() == g2.floors.size());
  };
  for (const auto& cfg : workload::toy_models()) {
    check(workload::build_layer_template(cfg).graph, {{"L", 64}, {"M", 20}, {"K_logits", 3}, {"K_FFN", 2}});
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) check(random_graph::random_template(seed), {});
}

TEST_CASE("JSON errors carry location") {
  const std::string path = "graph_syntax_error.json";
  {
    std::ofstream out(path);
    out << "{\n  \"symbols\": [\n    \"L\",\n  ]\n}\n";
  }
  try {
    graph::load_template(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path + ":4:") != std::string::npos);
  }
  std::remove(path.c_str());

  const auto bad = nlohmann::json::parse(R"({"symbols": [], "tensors": [{"id": "a", "shape": ["L"],
      "element_size": 4, "tag": "other"}], "ops": []})");
  try {
    graph::template_from_json(bad, "mem");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mem: /tensors/0") != std::string::npos);
  }
}
