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

#include <random>

#include "doctest.h"
#include "mosaic/common.hpp"
#include "mosaic/symbolic.hpp"

using mosaic::Bindings;
using mosaic::SymExpr;

TEST_CASE("literals, symbols and arithmetic evaluate") {
  const Bindings b{{"L", 10}, {"M", 3}};
  CHECK(SymExpr(7).evaluate(b) == 7);
  CHECK(SymExpr::sym("L").evaluate(b) == 10);
  CHECK((SymExpr::sym("L") * SymExpr(8) + SymExpr::sym("M")).evaluate(b) == 83);
  CHECK(SymExpr::parse("L*8*4").evaluate(b) == 320);
}

TEST_CASE("ceil division rounds up") {
  const Bindings b{{"M", 10}, {"K_logits", 4}};
  CHECK(SymExpr::parse("ceil(M, K_logits)").evaluate(b) == 3);
  CHECK(SymExpr::parse("ceil(8, 4)").evaluate({}) == 2);
  CHECK(SymExpr::parse("ceil(0, 4)").evaluate({}) == 0);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto n = static_cast<std::int64_t>(rng() % 10000);
    const auto d = static_cast<std::int64_t>(rng() % 97 + 1);
    const auto c = SymExpr::ceil(SymExpr(n), SymExpr(d)).evaluate({});
    CHECK((c - 1) * d < n);
    CHECK(n <= c * d);
  }
}

TEST_CASE("parser honours precedence and parentheses") {
  CHECK(SymExpr::parse("2+3*4").evaluate({}) == 14);
  CHECK(SymExpr::parse("(2+3)*4").evaluate({}) == 20);
  CHECK(SymExpr::parse(" ceil( L + 1 , 2 ) * 3 ").evaluate({{"L", 4}}) == 9);
}

TEST_CASE("to_string round-trips") {
  for (const char* text : {"L", "42", "L*8", "ceil(M, K_logits)*100", "(L+1)*ceil(L, K_FFN)+3",
                           "ceil(L*2, K_FFN+1)"}) {
    const auto e = SymExpr::parse(text);
    const auto again = SymExpr::parse(e.to_string());
    CHECK(again == e);
    const Bindings b{{"L", 13}, {"M", 5}, {"K_logits", 3}, {"K_FFN", 2}};
    CHECK(again.evaluate(b) == e.evaluate(b));
  }
}

TEST_CASE("symbols and ceil numerators are reported") {
  const auto e = SymExpr::parse("ceil(M, K_logits)*100 + L");
  CHECK(e.symbols() == std::set<std::string>{"K_logits", "L", "M"});
  const auto nums = e.ceil_numerators_over("K_logits");
  REQUIRE(nums.size() == 1);
  CHECK(nums[0] == SymExpr::sym("M"));
  CHECK(e.ceil_numerators_over("K_FFN").empty());
}

TEST_CASE("bad expressions and bindings are rejected") {
  CHECK_THROWS_AS(SymExpr::parse("L +"), mosaic::ParseError);
  CHECK_THROWS_AS(SymExpr::parse("ceil(L)"), mosaic::ParseError);
  CHECK_THROWS_AS(SymExpr::parse("L - 1"), mosaic::ParseError);
  CHECK_THROWS_AS(SymExpr::parse(""), mosaic::ParseError);
  CHECK_THROWS_AS(SymExpr(-1), mosaic::BuildError);
  CHECK_THROWS_AS(SymExpr::sym("L").evaluate({}), mosaic::InstantiationError);
  CHECK_THROWS_AS(SymExpr::sym("L").evaluate({{"L", -2}}), mosaic::InstantiationError);
  CHECK_THROWS_AS(SymExpr::parse("ceil(4, K)").evaluate({{"K", 0}}), mosaic::InstantiationError);
  CHECK_THROWS_AS(SymExpr::parse("L*L*L").evaluate({{"L", std::int64_t{1} << 40}}), mosaic::InstantiationError);
}
