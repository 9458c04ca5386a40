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

#include "mosaic/symbolic.hpp"

#include <cctype>
#include <limits>
#include <vector>

#include "mosaic/common.hpp"

namespace mosaic {

struct SymExpr::Node {
  Kind kind = Kind::constant;
  std::int64_t value = 0;
  std::string name;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SymExpr parse_all() {
    SymExpr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("shape expression '" + std::string(text_) + "' column " +
                     std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  SymExpr parse_expr() {
    SymExpr e = parse_prod();
    while (accept('+')) e = e + parse_prod();
    return e;
  }

  SymExpr parse_prod() {
    SymExpr e = parse_atom();
    while (accept('*')) e = e * parse_atom();
    return e;
  }

  SymExpr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        int digit = text_[pos_] - '0';
        if (v > (kMax - digit) / 10) fail("integer literal overflows");
        v = v * 10 + digit;
        ++pos_;
      }
      return SymExpr(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string word(text_.substr(start, pos_ - start));
      if (word == "ceil") {
        expect('(');
        SymExpr num = parse_expr();
        expect(',');
        SymExpr den = parse_expr();
        expect(')');
        return SymExpr::ceil(std::move(num), std::move(den));
      }
      return SymExpr::sym(std::move(word));
    }
    if (accept('(')) {
      SymExpr e = parse_expr();
      expect(')');
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SymExpr::SymExpr() : SymExpr(std::int64_t{0}) {}

SymExpr::SymExpr(std::int64_t value) {
  if (value < 0) throw BuildError("negative literal in shape expression");
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->value = value;
  node_ = std::move(n);
}

SymExpr::SymExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

SymExpr SymExpr::sym(std::string name) {
  if (name.empty()) throw BuildError("empty symbol name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::symbol;
  n->name = std::move(name);
  return SymExpr(std::shared_ptr<const Node>(std::move(n)));
}

SymExpr SymExpr::ceil(SymExpr num, SymExpr den) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::ceil_div;
  n->lhs = std::move(num.node_);
  n->rhs = std::move(den.node_);
  return SymExpr(std::shared_ptr<const Node>(std::move(n)));
}

SymExpr operator+(SymExpr a, SymExpr b) {
  auto n = std::make_shared<SymExpr::Node>();
  n->kind = SymExpr::Kind::add;
  n->lhs = std::move(a.node_);
  n->rhs = std::move(b.node_);
  return SymExpr(std::shared_ptr<const SymExpr::Node>(std::move(n)));
}

SymExpr operator*(SymExpr a, SymExpr b) {
  auto n = std::make_shared<SymExpr::Node>();
  n->kind = SymExpr::Kind::mul;
  n->lhs = std::move(a.node_);
  n->rhs = std::move(b.node_);
  return SymExpr(std::shared_ptr<const SymExpr::Node>(std::move(n)));
}

bool operator==(const SymExpr& a, const SymExpr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case SymExpr::Kind::constant: return x.value == y.value;
    case SymExpr::Kind::symbol: return x.name == y.name;
    default:
      return SymExpr(x.lhs) == SymExpr(y.lhs) && SymExpr(x.rhs) == SymExpr(y.rhs);
  }
}

SymExpr SymExpr::parse(std::string_view text) { return Parser(text).parse_all(); }

SymExpr::Kind SymExpr::kind() const { return node_->kind; }

std::int64_t SymExpr::evaluate(const Bindings& bindings) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::constant:
      return n.value;
    case Kind::symbol: {
      auto it = bindings.find(n.name);
      if (it == bindings.end()) throw InstantiationError("missing binding for symbol '" + n.name + "'");
      if (it->second < 0) {
        throw InstantiationError("negative binding " + n.name + "=" + std::to_string(it->second));
      }
      return it->second;
    }
    case Kind::add: {
      std::int64_t a = SymExpr(n.lhs).evaluate(bindings);
      std::int64_t b = SymExpr(n.rhs).evaluate(bindings);
      if (a > kMax - b) throw InstantiationError("overflow evaluating '" + to_string() + "'");
      return a + b;
    }
    case Kind::mul: {
      std::int64_t a = SymExpr(n.lhs).evaluate(bindings);
      std::int64_t b = SymExpr(n.rhs).evaluate(bindings);
      if (a != 0 && b > kMax / a) throw InstantiationError("overflow evaluating '" + to_string() + "'");
      return a * b;
    }
    case Kind::ceil_div: {
      std::int64_t a = SymExpr(n.lhs).evaluate(bindings);
      std::int64_t b = SymExpr(n.rhs).evaluate(bindings);
      if (b == 0) throw InstantiationError("division by zero in '" + to_string() + "'");
      return a / b + (a % b != 0 ? 1 : 0);
    }
  }
  return 0;
}

std::set<std::string> SymExpr::symbols() const {
  std::set<std::string> out;
  std::vector<const Node*> stack{node_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->kind == Kind::symbol) {
      out.insert(n->name);
    } else if (n->kind != Kind::constant) {
      stack.push_back(n->lhs.get());
      stack.push_back(n->rhs.get());
    }
  }
  return out;
}

std::vector<SymExpr> SymExpr::ceil_numerators_over(const std::string& symbol) const {
  std::vector<SymExpr> out;
  std::vector<std::shared_ptr<const Node>> stack{node_};
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    if (n->kind == Kind::constant || n->kind == Kind::symbol) continue;
    if (n->kind == Kind::ceil_div && n->rhs->kind == Kind::symbol && n->rhs->name == symbol) {
      out.push_back(SymExpr(n->lhs));
    }
    stack.push_back(n->lhs);
    stack.push_back(n->rhs);
  }
  return out;
}

std::string SymExpr::to_string() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::constant: return std::to_string(n.value);
    case Kind::symbol: return n.name;
    case Kind::ceil_div:
      return "ceil(" + SymExpr(n.lhs).to_string() + ", " + SymExpr(n.rhs).to_string() + ")";
    case Kind::add: {
      // Left-associative: only a right-nested sum needs parentheses.
      SymExpr rhs(n.rhs);
      std::string r = rhs.to_string();
      if (rhs.kind() == Kind::add) r = "(" + r + ")";
      return SymExpr(n.lhs).to_string() + " + " + r;
    }
    case Kind::mul: {
      auto wrap = [](const SymExpr& e, bool right) {
        bool paren = e.kind() == Kind::add || (right && e.kind() == Kind::mul);
        return paren ? "(" + e.to_string() + ")" : e.to_string();
      };
      return wrap(SymExpr(n.lhs), false) + " * " + wrap(SymExpr(n.rhs), true);
    }
  }
  return {};
}

}  // namespace mosaic
