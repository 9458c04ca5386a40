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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/common.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/planner.hpp"

namespace mosaic::vmm {

inline constexpr Bytes kHostPage = 64 * kKiB;
inline constexpr Bytes kDevicePage = 2 * kMiB;

enum class Backend { os, simulated };

/// A reserved virtual range whose committed part is always the prefix
/// [base, base + committed_bytes).
class Workspace {
 public:
  /// Rounds reserved_bytes up to a page multiple. Throws UsageError for a zero
  /// size or a page size that is not a power of two (or, for the OS backend,
  /// smaller than the OS page), ResourceError when the mapping fails.
  static Workspace reserve(Bytes reserved_bytes, Bytes page_size = kHostPage,
                           Backend backend = Backend::simulated);

  Workspace(Workspace&& other) noexcept;
  Workspace& operator=(Workspace&& other) noexcept;
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace();

  /// Grows or shrinks the committed prefix to ceil(target / page) pages.
  /// Throws CapacityError beyond the reservation.
  void commit_to(Bytes target_bytes);

  Bytes reserved_bytes() const { return reserved_; }
  Bytes committed_bytes() const { return committed_; }
  Bytes page_size() const { return page_; }
  Backend backend() const { return backend_; }
  /// Base of the range; null for the simulated backend.
  std::byte* data() const { return base_; }

 private:
  Workspace(Bytes reserved, Bytes page, Backend backend, std::byte* base);
  void release() noexcept;

  Bytes reserved_ = 0;
  Bytes committed_ = 0;
  Bytes page_ = 0;
  Backend backend_ = Backend::simulated;
  std::byte* base_ = nullptr;
};

struct Fault {
  std::string kind;  // "out_of_range", "overlap" or "clobber"
  std::size_t position = 0;
  std::string op_kind;
  std::size_t group = 0;
  std::optional<std::size_t> other_group;
  std::string message;
};

struct ExecutionReport {
  std::size_t ops_executed = 0;
  std::vector<Fault> faults;
  Bytes committed_bytes = 0;
  Bytes workspace_size = 0;
  bool clean() const { return faults.empty(); }
};

/// Walks the ops in timeline order and touches every group each op reads or
/// writes. Each touch is checked against [0, workspace_size) and against the
/// ranges of the groups live at that op; the OS backend also fills each
/// group with an 8-byte tag derived from its id and re-checks it on every
/// touch. Throws PreconditionError when the committed prefix is smaller than
/// the plan or the plan does not match the graph.
ExecutionReport execute_plan(Workspace& ws, const planner::MemoryPlan& plan,
                             const graph::ConcreteGraph& g);

/// As execute_plan, but throws ExecutionFault describing the first fault.
ExecutionReport execute_plan_checked(Workspace& ws, const planner::MemoryPlan& plan,
                                     const graph::ConcreteGraph& g);

/// Tag written into group `id`'s storage.
std::uint64_t canary(std::size_t group_id);

/// {ops_executed, faults:[...], committed_bytes, workspace_size}
nlohmann::json to_json(const ExecutionReport& report);

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

}  // namespace mosaic::vmm
