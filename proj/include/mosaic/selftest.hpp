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
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace mosaic::selftest {

enum class Injection { none, planner_off_by_one };

struct Options {
  std::uint64_t seed = 1;
  Injection inject = Injection::none;
  std::size_t plan_cases = 1000;
  std::size_t oracle_cases = 200;
  std::size_t kernel_cases = 100;
  std::size_t vmm_cases = 200;
};

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  // First failing case, with enough to replay it.
  std::optional<nlohmann::json> counterexample;
  bool passed() const { return failures == 0; }
};

struct Report {
  std::uint64_t seed = 0;
  std::string injection;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Plan validity, exact-vs-first-fit dominance, chunk-search equivalence,
/// kernel oracle and vmm tightness, all driven by `seed`.
Report run(const Options& options);

/// Seed of case `index` of check `check`.
std::uint64_t case_seed(std::uint64_t seed, std::uint32_t check, std::uint64_t index);

nlohmann::json to_json(const Report& report);
/// check,cases,failures,status
void write_csv(std::ostream& os, const Report& report);
void print_table(std::ostream& os, const Report& report);

Injection injection_from_string(const std::string& s);

}  // namespace mosaic::selftest
