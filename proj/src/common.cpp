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

#include "mosaic/common.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <locale>
#include <sstream>

namespace mosaic {

std::string_view to_string(Component c) {
  switch (c) {
    case Component::hidden: return "hidden";
    case Component::attention: return "attention";
    case Component::ffn: return "ffn";
    case Component::logits: return "logits";
    case Component::other: return "other";
  }
  return "other";
}

std::optional<Component> component_from_string(std::string_view s) {
  for (Component c : kAllComponents) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

Bytes parse_bytes(std::string_view text) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  std::string_view s = trim(text);
  std::size_t split = 0;
  while (split < s.size() &&
         (std::isdigit(static_cast<unsigned char>(s[split])) || s[split] == '.')) {
    ++split;
  }
  std::string_view number = s.substr(0, split);
  std::string_view suffix = trim(s.substr(split));
  if (number.empty()) throw UsageError("invalid byte size '" + std::string(text) + "'");

  Bytes scale = 1;
  if (suffix.empty() || suffix == "B") {
    scale = 1;
  } else if (suffix == "KiB") {
    scale = kKiB;
  } else if (suffix == "MiB") {
    scale = kMiB;
  } else if (suffix == "GiB") {
    scale = kGiB;
  } else {
    throw UsageError("unknown byte suffix '" + std::string(suffix) +
                     "' (expected KiB, MiB or GiB)");
  }

  if (number.find('.') == std::string_view::npos) {
    Bytes v = 0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), v);
    if (ec != std::errc() || ptr != number.data() + number.size() ||
        (v != 0 && scale > UINT64_MAX / v)) {
      throw UsageError("invalid byte size '" + std::string(text) + "'");
    }
    return v * scale;
  }
  // Fractional values are only meaningful with a suffix; round to bytes.
  char* end = nullptr;
  std::string owned(number);
  double v = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size() || !(v >= 0)) {
    throw UsageError("invalid byte size '" + std::string(text) + "'");
  }
  return static_cast<Bytes>(std::llround(v * static_cast<double>(scale)));
}

std::string format_bytes(Bytes b) {
  char buf[64];
  if (b >= kGiB) {
    std::snprintf(buf, sizeof buf, "%.2f GiB", static_cast<double>(b) / kGiB);
  } else if (b >= kMiB) {
    std::snprintf(buf, sizeof buf, "%.2f MiB", static_cast<double>(b) / kMiB);
  } else if (b >= kKiB) {
    std::snprintf(buf, sizeof buf, "%.2f KiB", static_cast<double>(b) / kKiB);
  } else {
    std::snprintf(buf, sizeof buf, "%llu B", static_cast<unsigned long long>(b));
  }
  return buf;
}

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace mosaic
