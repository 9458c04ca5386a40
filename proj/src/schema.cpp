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

#include "mosaic/schema.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <vector>

#include "mosaic/common.hpp"

namespace mosaic::schema {

using nlohmann::json;

namespace {

enum class T { integer, number, string, boolean, array, object, any, integer_or_null };

struct Field {
  const char* key;
  T type;
};

bool matches(const json& v, T t) {
  switch (t) {
    case T::integer: return v.is_number_integer();
    case T::number: return v.is_number();
    case T::string: return v.is_string();
    case T::boolean: return v.is_boolean();
    case T::array: return v.is_array();
    case T::object: return v.is_object();
    case T::any: return true;
    case T::integer_or_null: return v.is_null() || v.is_number_integer();
  }
  return false;
}

const std::map<std::string_view, std::vector<Field>>& schemas() {
  static const std::map<std::string_view, std::vector<Field>> s = {
      {"plan", {{"alignment", T::integer}, {"workspace_size", T::integer}, {"groups", T::array}}},
      {"plan_group",
       {{"id", T::integer}, {"offset", T::integer}, {"size", T::integer}, {"def", T::integer},
        {"last_use", T::integer}, {"tag", T::string}}},
      {"plan_stats",
       {{"workspace_size", T::integer}, {"lower_bound", T::integer}, {"group_count", T::integer},
        {"planning_time_ns", T::integer}}},
      {"chunk_outcome",
       {{"k_logits", T::integer_or_null}, {"k_ffn", T::integer_or_null}, {"evaluations", T::integer},
        {"final_peak", T::integer}, {"floor", T::integer}, {"feasible", T::boolean}}},
      {"chunk_search", {{"budget", T::integer}, {"bottleneck", T::object}}},
      {"execution_report",
       {{"ops_executed", T::integer}, {"faults", T::array}, {"committed_bytes", T::integer},
        {"workspace_size", T::integer}}},
      {"inflation",
       {{"pipeline", T::string}, {"reserved_peak", T::integer}, {"theoretical_peak", T::integer},
        {"inflation_rate", T::number}, {"steps", T::array}}},
      {"allocsim", {{"model", T::string}, {"myopic", T::object}, {"global", T::object}}},
      {"lmax", {{"model", T::string}, {"prompt_ratio", T::number}, {"budget", T::integer}, {"results", T::array}}},
      {"selftest", {{"seed", T::integer}, {"injection", T::string}, {"passed", T::boolean}, {"checks", T::array}}},
      {"manifest", {{"subcommand", T::string}, {"argv", T::array}, {"seed", T::integer}}},
      {"bench_kernel",
       {{"tokens", T::integer}, {"d_model", T::integer}, {"vocab", T::integer}, {"masked", T::integer},
        {"scratch_peak_elements", T::integer}, {"scratch_bound", T::integer}}},
  };
  return s;
}

void check_fields(std::string_view schema, const json& doc, const std::string& where) {
  const auto it = schemas().find(schema);
  if (it == schemas().end()) throw ValidationError("unknown schema '" + std::string(schema) + "'");
  if (!doc.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& f : it->second) {
    if (!doc.contains(f.key)) throw ValidationError(where + ": missing key '" + f.key + "'");
    if (!matches(doc.at(f.key), f.type)) {
      throw ValidationError(where + ": key '" + f.key + "' has the wrong type");
    }
  }
}

}  // namespace

void check_json(std::string_view schema, const json& doc) {
  const std::string where(schema);
  check_fields(schema, doc, where);
  if (schema == "plan") {
    for (std::size_t i = 0; i < doc["groups"].size(); ++i) {
      check_fields("plan_group", doc["groups"][i], where + "/groups/" + std::to_string(i));
    }
  } else if (schema == "chunk_search") {
    check_fields("chunk_outcome", doc["bottleneck"], where + "/bottleneck");
    if (doc.contains("bruteforce")) check_fields("chunk_outcome", doc["bruteforce"], where + "/bruteforce");
  } else if (schema == "allocsim") {
    check_fields("inflation", doc["myopic"], where + "/myopic");
    check_fields("inflation", doc["global"], where + "/global");
  }
}

void check_csv(std::string_view header, const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ValidationError("CSV header mismatch: expected '" + std::string(header) + "'");
  }
  const auto fields = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
  const auto want = fields(line);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (fields(line) != want) {
      throw ValidationError("CSV row " + std::to_string(row) + " has " + std::to_string(fields(line)) +
                            " fields, expected " + std::to_string(want));
    }
  }
}

}  // namespace mosaic::schema
