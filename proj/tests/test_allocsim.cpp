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

#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mosaic/allocsim.hpp"
#include "mosaic/caching_allocator.hpp"
#include "mosaic/workload.hpp"

using namespace mosaic;
using allocsim::AllocatorConfig;
using allocsim::CachingAllocator;
using allocsim::Handle;

namespace {

AllocatorConfig mib_granularity() {
  AllocatorConfig c;
  c.small_segment = kMiB;
  c.segment_granularity = kMiB;
  return c;
}

Bytes free_bytes(const CachingAllocator& a) {
  Bytes total = 0;
  for (const auto& s : a.segments())
    for (const auto& b : s.blocks)
      if (b.free) total += b.size;
  return total;
}

Bytes largest_free(const CachingAllocator& a) {
  Bytes best = 0;
  for (const auto& s : a.segments())
    for (const auto& b : s.blocks)
      if (b.free) best = std::max(best, b.size);
  return best;
}

void check_structure(const CachingAllocator& a) {
  Bytes reserved = 0, used = 0;
  for (const auto& s : a.segments()) {
    Bytes cursor = 0;
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
      const auto& b = s.blocks[i];
      CHECK(b.offset == cursor);
      CHECK(b.size > 0);
      cursor += b.size;
      if (!b.free) used += b.size;
      if (i > 0) CHECK_FALSE((b.free && s.blocks[i - 1].free));
    }
    CHECK(cursor == s.size);
    reserved += s.size;
  }
  CHECK(reserved == a.reserved_bytes());
  CHECK(used == a.allocated_bytes());
  CHECK(used + free_bytes(a) == reserved);
}

}  // namespace

TEST_CASE("first allocation creates one segment") {
  CachingAllocator a(mib_granularity());
  const auto h = a.alloc(100);
  REQUIRE(a.segments().size() == 1);
  CHECK(a.segments()[0].size == kMiB);
  CHECK(a.segments()[0].blocks.front().size == 100);
  CHECK_FALSE(a.segments()[0].blocks.front().free);
  CHECK(h.offset == 0);
  CHECK(a.reserved_bytes() == kMiB);
  CHECK(a.allocated_bytes() == 100);
  check_structure(a);
}

TEST_CASE("segment sizing rules") {
  CachingAllocator a;
  a.alloc(100);
  CHECK(a.reserved_bytes() == 2 * kMiB);
  a.alloc(3 * kMiB);
  CHECK(a.reserved_bytes() == 2 * kMiB + 4 * kMiB);
  // 1 MiB fits the cached remainder of the first segment; 2 MiB fits nowhere.
  a.alloc(kMiB);
  CHECK(a.reserved_bytes() == 2 * kMiB + 4 * kMiB);
  a.alloc(2 * kMiB);
  CHECK(a.reserved_bytes() == 2 * kMiB + 4 * kMiB + 2 * kMiB);
  CHECK(a.segments_created() == 3);
  check_structure(a);
}

TEST_CASE("cached blocks are reused") {
  CachingAllocator a(mib_granularity());
  const auto h = a.alloc(100);
  a.free(h);
  CHECK(a.allocated_bytes() == 0);
  const auto g = a.alloc(80);
  CHECK(g == h);
  CHECK(a.segments().size() == 1);
  CHECK(a.segments()[0].blocks.front().size == 80);

  // A remainder below the split threshold stays attached to the block.
  CachingAllocator b(mib_granularity());
  const auto x = b.alloc(1000);
  const auto y = b.alloc(kMiB - 1000);
  b.free(x);
  const auto z = b.alloc(700);
  CHECK(z == x);
  CHECK(b.allocated_bytes() == 1000 + (kMiB - 1000));
  b.free(y);
  b.free(z);
  check_structure(b);
}

TEST_CASE("free then alloc of the same size returns the same offset") {
  CachingAllocator a;
  std::vector<Handle> hs;
  for (const Bytes s : {Bytes{4096}, Bytes{300000}, Bytes{700}, Bytes{5 * kMiB}}) hs.push_back(a.alloc(s));
  const Bytes before = a.reserved_bytes();
  a.free(hs[1]);
  CHECK(a.alloc(300000) == hs[1]);
  a.free(hs[3]);
  CHECK(a.alloc(5 * kMiB) == hs[3]);
  CHECK(a.reserved_bytes() == before);
}

TEST_CASE("fragmentation witness") {
  CachingAllocator a;
  const Bytes big = 3 * kMiB / 2;
  const auto first = a.alloc(big);
  a.alloc(big);
  a.free(first);
  const Bytes c = 9 * kMiB / 4;
  CHECK(c > big);
  CHECK(free_bytes(a) >= c);
  CHECK(largest_free(a) < c);
  const auto segs = a.segments_created();
  a.alloc(c);
  CHECK(a.segments_created() == segs + 1);
  check_structure(a);
}

TEST_CASE("usage errors") {
  CachingAllocator a;
  const auto h = a.alloc(64);
  a.free(h);
  CHECK_THROWS_AS(a.free(h), UsageError);
  CHECK_THROWS_AS(a.free(Handle{42, 0}), UsageError);
  CHECK_THROWS_AS(a.alloc(0), UsageError);
}

TEST_CASE("free all keeps the cache") {
  CachingAllocator a;
  std::vector<Handle> hs;
  for (int i = 1; i <= 20; ++i) hs.push_back(a.alloc(static_cast<Bytes>(i) * 150000));
  const Bytes reserved = a.reserved_bytes();
  for (const auto& h : hs) a.free(h);
  CHECK(a.allocated_bytes() == 0);
  CHECK(a.reserved_bytes() == reserved);
  for (const auto& s : a.segments()) CHECK(s.blocks.size() == 1);
  a.release_cache();
  CHECK(a.reserved_bytes() == 0);
  CHECK(a.segments().empty());
}

TEST_CASE("random scripts conserve bytes and never shrink the reservation") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    AllocatorConfig cfg;
    cfg.audit = true;
    CachingAllocator a(cfg), twin(cfg);
    std::mt19937_64 rng(seed);
    std::vector<Handle> live;
    Bytes prev_reserved = 0;
    for (int step = 0; step < 300; ++step) {
      if (live.empty() || rng() % 3 != 0) {
        const Bytes size = 1 + rng() % (rng() % 4 == 0 ? 5 * kMiB : 64 * kKiB);
        live.push_back(a.alloc(size));
        CHECK(twin.alloc(size) == live.back());
      } else {
        const std::size_t i = rng() % live.size();
        a.free(live[i]);
        twin.free(live[i]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      }
      CHECK(a.reserved_bytes() >= prev_reserved);
      CHECK(a.allocated_bytes() <= a.reserved_bytes());
      prev_reserved = a.reserved_bytes();
    }
    check_structure(a);
    CHECK_NOTHROW(a.check_conservation());
    CHECK(a.peak_reserved() == a.reserved_bytes());
    std::ostringstream x, y;
    a.write_event_csv(x);
    twin.write_event_csv(y);
    CHECK(x.str() == y.str());
  }
  CachingAllocator a;
  a.alloc(1);
  std::ostringstream os;
  a.write_event_csv(os);
  CHECK(os.str().rfind("event_index,op,bytes,segment_id,offset,reserved,allocated\n", 0) == 0);
}

TEST_CASE("one subgraph, one static step: segment rounding only") {
  for (const auto& cfg : workload::toy_models()) {
    workload::ScenarioConfig scen;
    scen.context_len = 1024;
    scen.prompt_ratio = 0.5;
    scen.steps = 1;
    allocsim::RunOptions opts;
    opts.policy = allocsim::BreakPolicy::none;
    const auto r = allocsim::run_myopic(cfg, scen, opts);
    const Bytes t = r.theoretical_peak;
    const Bytes g = 2 * kMiB;
    const Bytes expect = t < kMiB ? g : (t + g - 1) / g * g;
    CHECK(r.reserved_peak == expect);
    CHECK(r.segments_created == 1);
  }
}

TEST_CASE("myopic planning inflates reserved memory") {
  for (const auto& cfg : workload::toy_models()) {
    workload::ScenarioConfig scen;
    scen.context_len = 2048;
    scen.prompt_ratio = 0.2;
    scen.steps = 16;
    CachingAllocator state;
    allocsim::RunOptions opts;
    opts.allocator.audit = true;
    const auto myopic = allocsim::run_myopic(cfg, scen, opts, &state);
    const auto global = allocsim::run_global(cfg, scen, opts);
    CAPTURE(cfg.name);
    CHECK(myopic.inflation_rate > 0.0);
    CHECK(myopic.reserved_peak >= myopic.theoretical_peak);
    CHECK(myopic.theoretical_peak == global.theoretical_peak);
    CHECK(myopic.steps.size() == 16);
    for (const auto& s : myopic.steps) CHECK(s.reserved_peak >= s.theoretical_peak);
    CHECK(global.reserved_peak >= global.theoretical_peak);
    CHECK(global.reserved_peak - global.theoretical_peak < opts.page_size);
    CHECK(state.reserved_bytes() == myopic.reserved_peak);
    CHECK(state.allocated_bytes() == 0);
    CHECK(myopic.events == state.events().size());
    MESSAGE(cfg.name << " myopic inflation " << myopic.inflation_rate << " global " << global.inflation_rate);
  }
}

TEST_CASE("break positions") {
  const auto tpl = workload::build_layer_template(workload::tiny_model());
  auto b = workload::step_bindings(10, 8);
  b[graph::kLogitsTrip] = 1;
  b[graph::kFfnTrip] = 1;
  const auto g = graph::instantiate(tpl.graph, b);
  const auto pos = allocsim::break_positions(tpl.graph, g, tpl.break_before);
  CHECK(pos.size() == tpl.break_before.size());
  for (std::size_t i = 1; i < pos.size(); ++i) CHECK(pos[i - 1] < pos[i]);
  CHECK(allocsim::break_positions(tpl.graph, g, {}).empty());
  CHECK(allocsim::break_policy_from_string("none") == allocsim::BreakPolicy::none);
}
