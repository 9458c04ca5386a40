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

#include "mosaic/caching_allocator.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mosaic::allocsim {

std::string_view to_string(Event::Op op) {
  switch (op) {
    case Event::Op::alloc: return "alloc";
    case Event::Op::free: return "free";
    case Event::Op::release: return "release";
  }
  return "alloc";
}

CachingAllocator::CachingAllocator(AllocatorConfig config) : config_(config) {
  if (config_.segment_granularity == 0 || config_.small_segment == 0) {
    throw UsageError("segment sizes must be positive");
  }
}

Bytes CachingAllocator::segment_size_for(Bytes bytes) const {
  if (bytes < config_.small_request && bytes <= config_.small_segment) return config_.small_segment;
  return ceil_div(bytes, config_.segment_granularity) * config_.segment_granularity;
}

void CachingAllocator::record(Event::Op op, Bytes bytes, std::size_t segment, Bytes offset) {
  events_.push_back({events_.size(), op, bytes, segment, offset, reserved_, allocated_});
  peak_reserved_ = std::max(peak_reserved_, reserved_);
  peak_allocated_ = std::max(peak_allocated_, allocated_);
  if (config_.audit) check_conservation();
}

Handle CachingAllocator::alloc(Bytes bytes) {
  if (bytes == 0) throw UsageError("zero-byte allocation");
  // Best fit: smallest free block that holds the request; first on ties.
  Segment* best_seg = nullptr;
  std::size_t best_block = 0;
  Bytes best_size = std::numeric_limits<Bytes>::max();
  for (auto& seg : segments_) {
    for (std::size_t i = 0; i < seg.blocks.size(); ++i) {
      const auto& b = seg.blocks[i];
      if (b.free && b.size >= bytes && b.size < best_size) {
        best_seg = &seg;
        best_block = i;
        best_size = b.size;
      }
    }
  }
  if (!best_seg) {
    Segment seg;
    seg.id = next_segment_id_++;
    seg.size = segment_size_for(bytes);
    seg.blocks.push_back({0, seg.size, true});
    reserved_ += seg.size;
    ++segments_created_;
    segments_.push_back(std::move(seg));
    best_seg = &segments_.back();
    best_block = 0;
  }
  auto& blocks = best_seg->blocks;
  Block& b = blocks[best_block];
  const Bytes rest = b.size - bytes;
  Bytes taken = b.size;
  if (rest >= config_.split_threshold) {
    taken = bytes;
    blocks.insert(blocks.begin() + static_cast<std::ptrdiff_t>(best_block) + 1,
                  Block{b.offset + bytes, rest, true});
  }
  Block& placed = blocks[best_block];
  placed.size = taken;
  placed.free = false;
  allocated_ += taken;
  const Handle h{best_seg->id, placed.offset};
  record(Event::Op::alloc, bytes, h.segment, h.offset);
  return h;
}

void CachingAllocator::free(Handle h) {
  auto seg = std::find_if(segments_.begin(), segments_.end(),
                          [&](const Segment& s) { return s.id == h.segment; });
  if (seg == segments_.end()) {
    throw UsageError("free of unknown segment " + std::to_string(h.segment));
  }
  auto& blocks = seg->blocks;
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.offset == h.offset; });
  if (it == blocks.end() || it->free) {
    throw UsageError("double free or unknown block at segment " + std::to_string(h.segment) +
                     " offset " + std::to_string(h.offset));
  }
  const Bytes size = it->size;
  it->free = true;
  allocated_ -= size;
  auto idx = static_cast<std::size_t>(it - blocks.begin());
  if (idx + 1 < blocks.size() && blocks[idx + 1].free) {
    blocks[idx].size += blocks[idx + 1].size;
    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(idx) + 1);
  }
  if (idx > 0 && blocks[idx - 1].free) {
    blocks[idx - 1].size += blocks[idx].size;
    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  record(Event::Op::free, size, h.segment, h.offset);
}

void CachingAllocator::release_cache() {
  Bytes dropped = 0;
  std::erase_if(segments_, [&](const Segment& s) {
    const bool idle = s.blocks.size() == 1 && s.blocks.front().free;
    if (idle) dropped += s.size;
    return idle;
  });
  reserved_ -= dropped;
  record(Event::Op::release, dropped, 0, 0);
}

void CachingAllocator::check_conservation() const {
  Bytes reserved = 0;
  Bytes allocated = 0;
  for (const auto& seg : segments_) {
    Bytes cursor = 0;
    for (std::size_t i = 0; i < seg.blocks.size(); ++i) {
      const auto& b = seg.blocks[i];
      if (b.offset != cursor || b.size == 0) {
        throw AnalysisError("segment " + std::to_string(seg.id) + " blocks do not tile it");
      }
      if (i > 0 && b.free && seg.blocks[i - 1].free) {
        throw AnalysisError("segment " + std::to_string(seg.id) + " has uncoalesced free blocks");
      }
      cursor += b.size;
      if (!b.free) allocated += b.size;
    }
    if (cursor != seg.size) {
      throw AnalysisError("segment " + std::to_string(seg.id) + " block sizes do not sum to its size");
    }
    reserved += seg.size;
  }
  if (reserved != reserved_ || allocated != allocated_ || allocated_ > reserved_) {
    throw AnalysisError("allocator totals out of balance");
  }
}

void CachingAllocator::write_event_csv(std::ostream& os) const {
  os << "event_index,op,bytes,segment_id,offset,reserved,allocated\n";
  for (const auto& e : events_) {
    os << e.index << ',' << to_string(e.op) << ',' << e.bytes << ',' << e.segment << ','
       << e.offset << ',' << e.reserved << ',' << e.allocated << '\n';
  }
}

}  // namespace mosaic::allocsim
