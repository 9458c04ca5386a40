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

#include <string>

#include "json.hpp"
#include "mosaic/graph.hpp"

namespace mosaic::graph {

/// JSON form of a template:
///
///     {"symbols": [...],
///      "tensors": [{"id", "shape": ["L", "ceil(M, K_logits)"], "element_size",
///                   "tag", "graph_input"?}],
///      "ops": [{"id", "kind", "inputs", "outputs", "in_place"?: {out: in}}],
///      "aliases": [{"producer", "consumer"}],
///      "barriers": [{"tensors", "release_after_op"}],
///      "chunk_loops": [{"first_op", "last_op", "trip"}]}
///
/// The returned template is frozen. Errors carry the JSON pointer of the
/// offending element; `source` prefixes every message.
GraphTemplate template_from_json(const nlohmann::json& j, const std::string& source = "<json>");
nlohmann::json to_json(const GraphTemplate& tpl);

/// Reads and parses a file. Syntax errors report `path:line:column`.
nlohmann::json read_json_file(const std::string& path);
GraphTemplate load_template(const std::string& path);

}  // namespace mosaic::graph
