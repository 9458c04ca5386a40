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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mosaic {

using Bytes = std::uint64_t;

inline constexpr Bytes kKiB = 1024;
inline constexpr Bytes kMiB = 1024 * kKiB;
inline constexpr Bytes kGiB = 1024 * kMiB;

// Every failure surfaced by the library derives from Error so callers (the
// CLI in particular) can map families of failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MOSAIC_DECLARE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MOSAIC_DECLARE_ERROR(BuildError);
MOSAIC_DECLARE_ERROR(InstantiationError);
MOSAIC_DECLARE_ERROR(ParseError);
MOSAIC_DECLARE_ERROR(AnalysisError);
MOSAIC_DECLARE_ERROR(ValidationError);
MOSAIC_DECLARE_ERROR(TooLarge);
MOSAIC_DECLARE_ERROR(ResourceError);
MOSAIC_DECLARE_ERROR(CapacityError);
MOSAIC_DECLARE_ERROR(PreconditionError);
MOSAIC_DECLARE_ERROR(ExecutionFault);
MOSAIC_DECLARE_ERROR(UsageError);
MOSAIC_DECLARE_ERROR(InputError);
// A scenario that cannot fit the memory budget under any allowed chunking.
MOSAIC_DECLARE_ERROR(Infeasible);

#undef MOSAIC_DECLARE_ERROR

// Peak attribution classes for activation tensors.
enum class Component { hidden, attention, ffn, logits, other };

inline constexpr Component kAllComponents[] = {
    Component::hidden, Component::attention, Component::ffn,
    Component::logits, Component::other};

std::string_view to_string(Component c);
std::optional<Component> component_from_string(std::string_view s);

// Only logits and FFN have a chunk-count knob.
constexpr bool is_chunkable(Component c) {
  return c == Component::logits || c == Component::ffn;
}

constexpr bool is_power_of_two(Bytes v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr Bytes align_up(Bytes v, Bytes alignment) {
  return alignment <= 1 ? v : (v + alignment - 1) / alignment * alignment;
}

constexpr Bytes ceil_div(Bytes num, Bytes den) { return (num + den - 1) / den; }

// Parses "4096", "64KiB", "1.5 GiB", "512MiB"; suffixes are binary.
Bytes parse_bytes(std::string_view text);
std::string format_bytes(Bytes b);
/// Fixed-point rendering with '.' as the decimal separator.
std::string format_fixed(double v, int digits = 6);

}  // namespace mosaic
