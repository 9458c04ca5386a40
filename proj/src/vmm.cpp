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

#include "mosaic/vmm.hpp"

#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>
#include <utility>

#include "mosaic/liveness.hpp"

namespace mosaic::vmm {

std::string_view to_string(Backend b) { return b == Backend::os ? "os" : "simulated"; }

Backend backend_from_string(std::string_view s) {
  if (s == "os") return Backend::os;
  if (s == "simulated" || s == "sim") return Backend::simulated;
  throw UsageError("unknown vmm backend '" + std::string(s) + "'");
}

Workspace::Workspace(Bytes reserved, Bytes page, Backend backend, std::byte* base)
    : reserved_(reserved), page_(page), backend_(backend), base_(base) {}

Workspace Workspace::reserve(Bytes reserved_bytes, Bytes page_size, Backend backend) {
  if (reserved_bytes == 0) throw UsageError("cannot reserve an empty workspace");
  if (!is_power_of_two(page_size)) throw UsageError("page size must be a power of two");
  const Bytes reserved = ceil_div(reserved_bytes, page_size) * page_size;
  if (backend == Backend::simulated) return Workspace(reserved, page_size, backend, nullptr);

  const auto host_page = static_cast<Bytes>(::sysconf(_SC_PAGESIZE));
  if (page_size < host_page) {
    throw UsageError("page size " + std::to_string(page_size) + " is below the host page " +
                     std::to_string(host_page));
  }
  void* p = ::mmap(nullptr, reserved, PROT_NONE, MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (p == MAP_FAILED) {
    throw ResourceError("reserving " + format_bytes(reserved) + " failed: " + std::strerror(errno));
  }
  return Workspace(reserved, page_size, backend, static_cast<std::byte*>(p));
}

Workspace::Workspace(Workspace&& other) noexcept
    : reserved_(std::exchange(other.reserved_, 0)),
      committed_(std::exchange(other.committed_, 0)),
      page_(other.page_),
      backend_(other.backend_),
      base_(std::exchange(other.base_, nullptr)) {}

Workspace& Workspace::operator=(Workspace&& other) noexcept {
  if (this != &other) {
    release();
    reserved_ = std::exchange(other.reserved_, 0);
    committed_ = std::exchange(other.committed_, 0);
    page_ = other.page_;
    backend_ = other.backend_;
    base_ = std::exchange(other.base_, nullptr);
  }
  return *this;
}

Workspace::~Workspace() { release(); }

void Workspace::release() noexcept {
  if (base_) ::munmap(base_, reserved_);
  base_ = nullptr;
}

void Workspace::commit_to(Bytes target_bytes) {
  if (target_bytes > reserved_) {
    throw CapacityError("commit of " + format_bytes(target_bytes) + " exceeds the reservation of " +
                        format_bytes(reserved_));
  }
  const Bytes target = ceil_div(target_bytes, page_) * page_;
  if (target == committed_) return;
  if (base_) {
    if (target > committed_) {
      if (::mprotect(base_ + committed_, target - committed_, PROT_READ | PROT_WRITE) != 0) {
        throw ResourceError(std::string("commit failed: ") + std::strerror(errno));
      }
    } else {
      const Bytes len = committed_ - target;
      if (::madvise(base_ + target, len, MADV_DONTNEED) != 0 ||
          ::mprotect(base_ + target, len, PROT_NONE) != 0) {
        throw ResourceError(std::string("decommit failed: ") + std::strerror(errno));
      }
    }
  }
  committed_ = target;
}

std::uint64_t canary(std::size_t group_id) {
  // splitmix64 finalizer
  std::uint64_t z = static_cast<std::uint64_t>(group_id) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void fill(std::byte* p, Bytes size, std::uint64_t tag) {
  for (Bytes i = 0; i < size; i += 8) {
    std::memcpy(p + i, &tag, std::min<Bytes>(8, size - i));
  }
}

// Offset of the first byte that no longer carries the tag, or size.
Bytes scan(const std::byte* p, Bytes size, std::uint64_t tag) {
  for (Bytes i = 0; i < size; i += 8) {
    const Bytes n = std::min<Bytes>(8, size - i);
    if (std::memcmp(p + i, &tag, n) != 0) return i;
  }
  return size;
}

}  // namespace

ExecutionReport execute_plan(Workspace& ws, const planner::MemoryPlan& plan, const graph::ConcreteGraph& g) {
  if (ws.committed_bytes() < plan.workspace_size) {
    throw PreconditionError("plan needs " + format_bytes(plan.workspace_size) + " but only " +
                            format_bytes(ws.committed_bytes()) + " are committed");
  }
  const auto table = liveness::analyze(g);
  if (plan.offsets.size() != table.groups.size()) {
    throw PreconditionError("plan covers " + std::to_string(plan.offsets.size()) +
                            " groups but the graph has " + std::to_string(table.groups.size()));
  }
  ExecutionReport report;
  report.committed_bytes = ws.committed_bytes();
  report.workspace_size = plan.workspace_size;

  std::byte* base = ws.data();
  const auto& groups = table.groups;
  auto in_range = [&](std::size_t id) {
    const Bytes off = plan.offsets[id];
    return off <= plan.workspace_size && groups[id].size <= plan.workspace_size - off;
  };
  std::set<std::pair<std::size_t, std::size_t>> reported;
  std::set<std::size_t> live;
  std::vector<bool> bad(groups.size(), false);

  for (std::size_t t = 0; t < g.ops.size(); ++t) {
    const auto& op = g.ops[t];
    auto fault = [&](std::string kind, std::size_t a, std::optional<std::size_t> b, std::string msg) {
      report.faults.push_back({std::move(kind), t, op.kind, a, b,
                               "op " + std::to_string(t) + " (" + op.kind + "): " + std::move(msg)});
    };

    std::set<std::size_t> touched;
    for (const auto* list : {&op.inputs, &op.outputs}) {
      for (const auto inst : *list) {
        if (const auto gid = table.group_of_instance[inst]) touched.insert(*gid);
      }
    }
    // Groups whose storage starts here join the live set.
    for (std::size_t id = 0; id < groups.size(); ++id) {
      if (groups[id].def == t) touched.insert(id);
    }

    for (const auto id : touched) {
      if (live.count(id)) continue;
      const bool ok = in_range(id);
      if (!ok) {
        bad[id] = true;
        fault("out_of_range", id, std::nullopt,
              "group " + std::to_string(id) + " at [" + std::to_string(plan.offsets[id]) + ", " +
                  std::to_string(plan.offsets[id] + groups[id].size) + ") leaves the workspace of " +
                  std::to_string(plan.workspace_size) + " bytes");
      }
      const Bytes lo = plan.offsets[id];
      const Bytes hi = lo + groups[id].size;
      for (const auto other : live) {
        const Bytes olo = plan.offsets[other];
        const Bytes ohi = olo + groups[other].size;
        if (groups[id].size && groups[other].size && lo < ohi && olo < hi) {
          reported.insert({std::min(id, other), std::max(id, other)});
          fault("overlap", id, other,
                "group " + std::to_string(id) + " overlaps live group " + std::to_string(other));
        }
      }
      live.insert(id);
      if (base && ok) fill(base + lo, groups[id].size, canary(id));
    }

    if (base) {
      for (const auto id : touched) {
        if (bad[id]) continue;
        const Bytes pos = scan(base + plan.offsets[id], groups[id].size, canary(id));
        if (pos == groups[id].size) continue;
        // Name the live group whose range covers the clobbered byte.
        std::optional<std::size_t> culprit;
        const Bytes addr = plan.offsets[id] + pos;
        for (const auto other : live) {
          if (other != id && plan.offsets[other] <= addr && addr < plan.offsets[other] + groups[other].size) {
            culprit = other;
          }
        }
        if (culprit && reported.count({std::min(id, *culprit), std::max(id, *culprit)})) {
          fill(base + plan.offsets[id], groups[id].size, canary(id));
          continue;
        }
        fault("clobber", id, culprit, "canary of group " + std::to_string(id) + " overwritten at byte " +
                                          std::to_string(addr));
        fill(base + plan.offsets[id], groups[id].size, canary(id));
      }
    }

    std::erase_if(live, [&](std::size_t id) { return groups[id].last_use <= t; });
    ++report.ops_executed;
  }
  return report;
}

ExecutionReport execute_plan_checked(Workspace& ws, const planner::MemoryPlan& plan,
                                     const graph::ConcreteGraph& g) {
  auto report = execute_plan(ws, plan, g);
  if (!report.clean()) throw ExecutionFault(report.faults.front().message);
  return report;
}

nlohmann::json to_json(const ExecutionReport& report) {
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : report.faults) {
    nlohmann::json j = {{"kind", f.kind}, {"position", f.position}, {"op_kind", f.op_kind},
                        {"group", f.group}, {"message", f.message}};
    j["other_group"] = f.other_group ? nlohmann::json(*f.other_group) : nlohmann::json(nullptr);
    faults.push_back(std::move(j));
  }
  return {{"ops_executed", report.ops_executed},
          {"faults", std::move(faults)},
          {"committed_bytes", report.committed_bytes},
          {"workspace_size", report.workspace_size}};
}

}  // namespace mosaic::vmm
