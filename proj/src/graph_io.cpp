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

#include "mosaic/graph_io.hpp"

#include <fstream>
#include <sstream>

namespace mosaic::graph {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    throw ParseError(source_ + ": " + (pointer.empty() ? "/" : pointer) + ": " + what);
  }

  const json& field(const json& obj, const std::string& pointer, const char* key) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(pointer, std::string("missing field '") + key + "'");
    return *it;
  }

  std::string string_at(const json& v, const std::string& pointer) const {
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings_at(const json& v, const std::string& pointer) const {
    if (!v.is_array()) fail(pointer, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(string_at(v[i], pointer + "/" + std::to_string(i)));
    }
    return out;
  }

  const json& array_or_empty(const json& obj, const char* key) const {
    static const json kEmpty = json::array();
    auto it = obj.find(key);
    if (it == obj.end()) return kEmpty;
    if (!it->is_array()) fail(std::string("/") + key, "expected an array");
    return *it;
  }

  // Runs a builder call, re-throwing build errors with the element's pointer.
  template <typename Fn>
  void at(const std::string& pointer, Fn&& fn) const {
    try {
      fn();
    } catch (const ParseError& e) {
      fail(pointer, e.what());
    } catch (const BuildError& e) {
      fail(pointer, e.what());
    }
  }

 private:
  std::string source_;
};

}  // namespace

GraphTemplate template_from_json(const json& j, const std::string& source) {
  Reader r(source);
  if (!j.is_object()) r.fail("", "expected a top-level object");

  std::vector<std::string> symbols;
  if (j.contains("symbols")) symbols = r.strings_at(j["symbols"], "/symbols");
  std::optional<GraphTemplate> built;
  r.at("/symbols", [&] { built.emplace(symbols); });
  GraphTemplate& tpl = *built;

  const json& tensors = r.array_or_empty(j, "tensors");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    std::string p = "/tensors/" + std::to_string(i);
    const json& t = tensors[i];
    TensorDecl decl;
    decl.id = r.string_at(r.field(t, p, "id"), p + "/id");
    const json& shape = r.field(t, p, "shape");
    if (!shape.is_array()) r.fail(p + "/shape", "expected an array");
    for (std::size_t d = 0; d < shape.size(); ++d) {
      std::string dp = p + "/shape/" + std::to_string(d);
      if (shape[d].is_number_unsigned()) {
        decl.shape.emplace_back(static_cast<std::int64_t>(shape[d].get<std::uint64_t>()));
      } else {
        std::string text = r.string_at(shape[d], dp);
        r.at(dp, [&] { decl.shape.push_back(SymExpr::parse(text)); });
      }
    }
    const json& es = r.field(t, p, "element_size");
    if (!es.is_number_unsigned() || es.get<std::uint64_t>() == 0 ||
        es.get<std::uint64_t>() > UINT32_MAX) {
      r.fail(p + "/element_size", "expected a positive integer");
    }
    decl.element_size = es.get<std::uint32_t>();
    if (t.contains("tag")) {
      std::string tag = r.string_at(t["tag"], p + "/tag");
      auto c = component_from_string(tag);
      if (!c) r.fail(p + "/tag", "unknown component tag '" + tag + "'");
      decl.tag = *c;
    }
    if (t.contains("graph_input")) {
      if (!t["graph_input"].is_boolean()) r.fail(p + "/graph_input", "expected a boolean");
      decl.graph_input = t["graph_input"].get<bool>();
    }
    r.at(p, [&] { tpl.add_tensor(std::move(decl)); });
  }

  const json& ops = r.array_or_empty(j, "ops");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::string p = "/ops/" + std::to_string(i);
    const json& o = ops[i];
    OpDecl op;
    op.id = r.string_at(r.field(o, p, "id"), p + "/id");
    op.kind = o.contains("kind") ? r.string_at(o["kind"], p + "/kind") : std::string("op");
    if (o.contains("inputs")) op.inputs = r.strings_at(o["inputs"], p + "/inputs");
    if (o.contains("outputs")) op.outputs = r.strings_at(o["outputs"], p + "/outputs");
    if (o.contains("in_place")) {
      const json& ip = o["in_place"];
      if (!ip.is_object()) r.fail(p + "/in_place", "expected an object");
      for (const auto& [out, in] : ip.items()) {
        op.in_place.emplace(out, r.string_at(in, p + "/in_place/" + out));
      }
    }
    r.at(p, [&] { tpl.add_op(std::move(op)); });
  }

  const json& aliases = r.array_or_empty(j, "aliases");
  for (std::size_t i = 0; i < aliases.size(); ++i) {
    std::string p = "/aliases/" + std::to_string(i);
    AliasConstraint a{r.string_at(r.field(aliases[i], p, "producer"), p + "/producer"),
                      r.string_at(r.field(aliases[i], p, "consumer"), p + "/consumer")};
    r.at(p, [&] { tpl.add_alias(std::move(a)); });
  }

  const json& barriers = r.array_or_empty(j, "barriers");
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    std::string p = "/barriers/" + std::to_string(i);
    Barrier b{r.strings_at(r.field(barriers[i], p, "tensors"), p + "/tensors"),
              r.string_at(r.field(barriers[i], p, "release_after_op"), p + "/release_after_op")};
    r.at(p, [&] { tpl.add_barrier(std::move(b)); });
  }

  const json& loops = r.array_or_empty(j, "chunk_loops");
  for (std::size_t i = 0; i < loops.size(); ++i) {
    std::string p = "/chunk_loops/" + std::to_string(i);
    ChunkLoop l{r.string_at(r.field(loops[i], p, "first_op"), p + "/first_op"),
                r.string_at(r.field(loops[i], p, "last_op"), p + "/last_op"),
                r.string_at(r.field(loops[i], p, "trip"), p + "/trip")};
    r.at(p, [&] { tpl.add_chunk_loop(std::move(l)); });
  }

  r.at("", [&] { tpl.freeze(); });
  return std::move(tpl);
}

json to_json(const GraphTemplate& tpl) {
  json j;
  j["symbols"] = tpl.symbols();
  j["tensors"] = json::array();
  for (const auto& t : tpl.tensors()) {
    json shape = json::array();
    for (const auto& d : t.shape) shape.push_back(d.to_string());
    json e = {{"id", t.id},
              {"shape", shape},
              {"element_size", t.element_size},
              {"tag", std::string(to_string(t.tag))}};
    if (t.graph_input) e["graph_input"] = true;
    j["tensors"].push_back(std::move(e));
  }
  j["ops"] = json::array();
  for (const auto& o : tpl.ops()) {
    json e = {{"id", o.id}, {"kind", o.kind}, {"inputs", o.inputs}, {"outputs", o.outputs}};
    if (!o.in_place.empty()) e["in_place"] = o.in_place;
    j["ops"].push_back(std::move(e));
  }
  j["aliases"] = json::array();
  for (const auto& a : tpl.aliases()) {
    j["aliases"].push_back({{"producer", a.producer}, {"consumer", a.consumer}});
  }
  j["barriers"] = json::array();
  for (const auto& b : tpl.barriers()) {
    j["barriers"].push_back({{"tensors", b.tensors}, {"release_after_op", b.release_after_op}});
  }
  j["chunk_loops"] = json::array();
  for (const auto& l : tpl.chunk_loops()) {
    j["chunk_loops"].push_back(
        {{"first_op", l.first_op}, {"last_op", l.last_op}, {"trip", l.trip_symbol}});
  }
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": invalid JSON");
  }
}

GraphTemplate load_template(const std::string& path) {
  return template_from_json(read_json_file(path), path);
}

}  // namespace mosaic::graph
