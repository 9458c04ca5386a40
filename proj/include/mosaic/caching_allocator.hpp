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
#include <ostream>
#include <vector>

#include "mosaic/common.hpp"

namespace mosaic::allocsim {

struct AllocatorConfig {
  Bytes split_threshold = 512;
  // Requests below small_request get a small_segment; larger ones round up to
  // a multiple of segment_granularity.
  Bytes small_request = kMiB;
  Bytes small_segment = 2 * kMiB;
  Bytes segment_granularity = 2 * kMiB;
  // Re-check conservation after every event (slow).
  bool audit = false;
};

struct Block {
  Bytes offset = 0;
  Bytes size = 0;
  bool free = true;
};

struct Segment {
  std::size_t id = 0;
  Bytes size = 0;
  std::vector<Block> blocks;  // ordered by offset, tiling [0, size)
};

struct Handle {
  std::size_t segment = 0;
  Bytes offset = 0;
  friend bool operator==(const Handle&, const Handle&) = default;
};

struct Event {
  enum class Op { alloc, free, release };
  std::size_t index = 0;
  Op op = Op::alloc;
  Bytes bytes = 0;
  std::size_t segment = 0;
  Bytes offset = 0;
  Bytes reserved = 0;
  Bytes allocated = 0;
};

/// Segment-caching allocator: best-fit over cached free blocks, new segments
/// on a miss, coalescing only inside a segment.
class CachingAllocator {
 public:
  explicit CachingAllocator(AllocatorConfig config = {});

  /// Throws UsageError for a zero-byte request.
  Handle alloc(Bytes bytes);
  /// Throws UsageError for an unknown or already freed handle.
  void free(Handle h);
  /// Drops every fully free segment.
  void release_cache();

  Bytes reserved_bytes() const { return reserved_; }
  Bytes allocated_bytes() const { return allocated_; }
  Bytes peak_reserved() const { return peak_reserved_; }
  Bytes peak_allocated() const { return peak_allocated_; }
  std::size_t segments_created() const { return segments_created_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Event>& events() const { return events_; }
  const AllocatorConfig& config() const { return config_; }

  /// Throws AnalysisError naming the first broken conservation rule.
  void check_conservation() const;

  /// event_index,op,bytes,segment_id,offset,reserved,allocated
  void write_event_csv(std::ostream& os) const;

 private:
  Bytes segment_size_for(Bytes bytes) const;
  void record(Event::Op op, Bytes bytes, std::size_t segment, Bytes offset);

  AllocatorConfig config_;
  std::vector<Segment> segments_;
  std::vector<Event> events_;
  std::size_t next_segment_id_ = 0;
  std::size_t segments_created_ = 0;
  Bytes reserved_ = 0;
  Bytes allocated_ = 0;
  Bytes peak_reserved_ = 0;
  Bytes peak_allocated_ = 0;
};

std::string_view to_string(Event::Op op);

}  // namespace mosaic::allocsim
