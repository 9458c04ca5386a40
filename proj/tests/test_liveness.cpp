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

#include <sstream>

#include "doctest.h"
#include "mosaic/graph.hpp"
#include "mosaic/liveness.hpp"
#include "mosaic/random_graph.hpp"
#include "mosaic/workload.hpp"
#include "oracles.hpp"

using namespace mosaic;
using graph::GraphTemplate;
using liveness::StorageGroup;

namespace {

SymExpr S(const char* text) { return SymExpr::parse(text); }

StorageGroup grp(Bytes size, std::size_t def, std::size_t last) {
  StorageGroup g;
  g.size = size;
  g.def = def;
  g.last_use = last;
  return g;
}

void check_against_oracle(const graph::ConcreteGraph& g) {
  const auto table = liveness::analyze(g);
  const auto expect = oracle::lifetimes(g);
  REQUIRE(table.groups.size() == expect.size());
  for (const auto& grp : table.groups) {
    const auto it = expect.find(grp.members);
    REQUIRE(it != expect.end());
    CHECK(it->second == oracle::Interval{grp.size, grp.def, grp.last_use});
  }
  CHECK(liveness::max_live(table) == oracle::max_live(table));
}

}  // namespace

TEST_CASE("chain lifetimes") {
  GraphTemplate t;
  t.add_tensor({"a", {S("16")}, 1});
  t.add_tensor({"b", {S("32")}, 1});
  t.add_op({"op0", "k", {}, {"a"}, {}});
  t.add_op({"op1", "k", {"a"}, {"b"}, {}});
  t.freeze();
  const auto table = liveness::analyze(graph::instantiate(t, {}));
  REQUIRE(table.groups.size() == 2);
  CHECK(table.groups[0].def == 0);
  CHECK(table.groups[0].last_use == 1);
  CHECK(table.groups[1].def == 1);
  CHECK(table.groups[1].last_use == 1);
  CHECK(table.timeline_length == 2);
}

TEST_CASE("alias merges into one group of the larger size") {
  GraphTemplate t;
  t.add_tensor({"a", {S("16")}, 1});
  t.add_tensor({"b", {S("16")}, 1});
  t.add_op({"op0", "k", {}, {"a"}, {}});
  t.add_op({"op1", "k", {"a"}, {"b"}, {}});
  t.add_alias({"a", "b"});
  t.freeze();
  const auto g = graph::instantiate(t, {});
  const auto table = liveness::analyze(g);
  REQUIRE(table.groups.size() == 1);
  CHECK(table.groups[0].size == 16);
  CHECK(table.groups[0].def == 0);
  CHECK(table.groups[0].last_use == 1);
  check_against_oracle(g);
}

TEST_CASE("alias cycles are rejected") {
  GraphTemplate t;
  t.add_tensor({"a", {S("8")}, 1});
  t.add_tensor({"b", {S("8")}, 1});
  t.add_op({"op0", "k", {}, {"a"}, {}});
  t.add_op({"op1", "k", {"a"}, {"b"}, {}});
  t.add_alias({"a", "b"});
  t.add_alias({"b", "a"});
  t.freeze();
  CHECK_THROWS_AS(liveness::analyze(graph::instantiate(t, {})), AnalysisError);
}

TEST_CASE("barrier holds a loop input to the end of the loop") {
  // make H at 0; three iterations of a three-op body occupy positions 1..9.
  GraphTemplate t({"K_FFN"});
  t.add_tensor({"H", {S("64")}, 1});
  t.add_tensor({"u", {S("8")}, 1});
  t.add_op({"make", "k", {}, {"H"}, {}});
  t.add_op({"read", "k", {"H"}, {"u"}, {}});
  t.add_op({"mid", "k", {"u"}, {}, {}});
  t.add_op({"tail", "k", {}, {}, {}});
  t.add_chunk_loop({"read", "tail", "K_FFN"});
  t.add_barrier({{"H"}, "tail"});
  t.freeze();
  const auto g = graph::instantiate(t, {{"K_FFN", 3}});
  REQUIRE(g.ops.size() == 10);
  const auto table = liveness::analyze(g);
  const auto h = *table.group_of_instance[0];
  CHECK(table.groups[h].def == 0);
  CHECK(table.groups[h].last_use == 9);
  check_against_oracle(g);

  // Per-iteration instances of u never overlap.
  std::vector<const StorageGroup*> us;
  for (const auto& grp : table.groups) {
    if (grp.size == 8) us.push_back(&grp);
  }
  REQUIRE(us.size() == 3);
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = i + 1; j < us.size(); ++j) CHECK_FALSE(us[i]->overlaps(*us[j]));
  }
}

TEST_CASE("graph inputs stay out of the table") {
  GraphTemplate t;
  t.add_tensor({"w", {S("1024")}, 1, Component::other, true});
  t.add_tensor({"a", {S("8")}, 1});
  t.add_op({"op0", "k", {"w"}, {"a"}, {}});
  t.freeze();
  const auto table = liveness::analyze(graph::instantiate(t, {}));
  CHECK(table.groups.size() == 1);
  CHECK(liveness::max_live(table) == 8);
}

TEST_CASE("dead outputs live during their defining op") {
  GraphTemplate t;
  t.add_tensor({"dead", {S("8")}, 1});
  t.add_op({"op0", "k", {}, {}, {}});
  t.add_op({"op1", "k", {}, {"dead"}, {}});
  t.add_op({"op2", "k", {}, {}, {}});
  t.freeze();
  const auto table = liveness::analyze(graph::instantiate(t, {}));
  REQUIRE(table.groups.size() == 1);
  CHECK(table.groups[0].def == 1);
  CHECK(table.groups[0].last_use == 1);
}

TEST_CASE("max_live examples") {
  CHECK(liveness::max_live(liveness::table_from_intervals({})) == 0);
  CHECK(liveness::max_live(liveness::table_from_intervals({grp(77, 0, 5)})) == 77);
  const auto t = liveness::table_from_intervals({grp(128, 0, 2), grp(64, 1, 3), grp(128, 3, 4)});
  CHECK(liveness::max_live(t) == 192);
  CHECK(oracle::max_live(t) == 192);
}

TEST_CASE("no-op insertion leaves max_live unchanged") {
  auto build = [](bool padded) {
    GraphTemplate t;
    t.add_tensor({"a", {S("128")}, 1});
    t.add_tensor({"b", {S("64")}, 1});
    t.add_tensor({"c", {S("128")}, 1});
    t.add_op({"op0", "k", {}, {"a"}, {}});
    if (padded) t.add_op({"pad0", "nop", {}, {}, {}});
    t.add_op({"op1", "k", {"a"}, {"b"}, {}});
    t.add_op({"op2", "k", {"a"}, {}, {}});
    if (padded) t.add_op({"pad1", "nop", {}, {}, {}});
    t.add_op({"op3", "k", {"b"}, {"c"}, {}});
    t.add_op({"op4", "k", {"c"}, {}, {}});
    t.freeze();
    return liveness::max_live(liveness::analyze(graph::instantiate(t, {})));
  };
  CHECK(build(false) == 192);
  CHECK(build(true) == 192);
}

TEST_CASE("analysis matches the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CAPTURE(seed);
    check_against_oracle(random_graph::random_graph(seed));
  }
  for (const auto& cfg : workload::toy_models()) {
    const auto tpl = workload::build_layer_template(cfg);
    check_against_oracle(graph::instantiate(tpl.graph, {{"L", 32}, {"M", 9}, {"K_logits", 3}, {"K_FFN", 4}}));
  }
}

TEST_CASE("table_from_intervals and CSV") {
  CHECK_THROWS_AS(liveness::table_from_intervals({grp(1, 3, 2)}), AnalysisError);
  auto g = grp(128, 0, 2);
  g.tag = Component::logits;
  std::ostringstream os;
  liveness::write_csv(os, liveness::table_from_intervals({g}));
  CHECK(os.str() == "group_id,size_bytes,def,last_use,tag\n0,128,0,2,logits\n");
}
