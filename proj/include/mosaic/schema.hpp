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
#include <string_view>

#include "json.hpp"

namespace mosaic::schema {

/// Checks the required keys and value types of an emitted document. Known
/// schemas: plan, plan_stats, chunk_search, execution_report, inflation,
/// allocsim, lmax, selftest, manifest, bench_kernel. Throws ValidationError.
void check_json(std::string_view schema, const nlohmann::json& doc);

/// Checks that `csv` starts with `header` and every row has as many fields.
void check_csv(std::string_view header, const std::string& csv);

}  // namespace mosaic::schema
