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

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mosaic {

using Bindings = std::map<std::string, std::int64_t, std::less<>>;

/// A symbolic dimension: integers and named symbols combined with `+`, `*`
/// and `ceil(a, b)` (integer division rounding up).
///
/// Textual grammar, with `*` binding tighter than `+`:
///
///     expr := prod ('+' prod)*
///     prod := atom ('*' atom)*
///     atom := INT | SYMBOL | 'ceil' '(' expr ',' expr ')' | '(' expr ')'
///
/// Expressions are immutable and cheap to copy (shared nodes).
class SymExpr {
 public:
  enum class Kind { constant, symbol, add, mul, ceil_div };

  SymExpr();  // the constant 0
  SymExpr(std::int64_t value);  // NOLINT(google-explicit-constructor)

  static SymExpr sym(std::string name);
  static SymExpr ceil(SymExpr num, SymExpr den);

  /// Throws ParseError with the column of the offending character.
  static SymExpr parse(std::string_view text);

  /// Throws InstantiationError on an unbound symbol, negative result,
  /// division by zero or overflow.
  std::int64_t evaluate(const Bindings& bindings) const;

  Kind kind() const;
  /// Symbols referenced anywhere in the expression.
  std::set<std::string> symbols() const;
  /// Numerators of every `ceil(x, symbol)` node whose denominator is exactly
  /// the given symbol.
  std::vector<SymExpr> ceil_numerators_over(const std::string& symbol) const;

  /// Canonical text; `parse(to_string())` is structurally identical.
  std::string to_string() const;

  friend SymExpr operator+(SymExpr a, SymExpr b);
  friend SymExpr operator*(SymExpr a, SymExpr b);
  friend bool operator==(const SymExpr& a, const SymExpr& b);

 private:
  struct Node;
  explicit SymExpr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace mosaic
