/*
 * Copyright 2026 The gcprof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GCPROF_HEAP_HPP
#define GCPROF_HEAP_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gcprof/common.hpp"
#include "gcprof/object.hpp"
#include "gcprof/profile.hpp"
#include "gcprof/sampler.hpp"

namespace gcprof {

struct HeapConfig {
  std::uint64_t nursery_size = 1ull << 20;     // power of two
  std::uint64_t large_object_threshold = 0;    // 0 -> nursery_size / 8
  std::uint64_t word_size = kWordBytes;        // fixed at 8
  std::uint64_t page_round = kWordBytes;       // large-object size rounding
  std::uint64_t old_arena_size = 0;            // 0 -> derived
  std::uint64_t max_heap_bytes = 0;            // 0 -> unlimited (old + large)
  std::uint64_t major_collection_threshold = 8ull << 20;

  /// Fills derived fields and checks the config invariants. Throws
  /// std::invalid_argument on a bad configuration.
  HeapConfig finalized() const;
};

struct MinorCollectionReport {
  std::uint64_t nursery_used_bytes = 0;
  std::uint64_t bytes_copied = 0;
  std::uint64_t objects_copied = 0;
  std::uint64_t samples_resolved = 0;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;

  std::uint64_t bytes_reclaimed() const {
    return nursery_used_bytes - bytes_copied;
  }
};

struct MajorCycleStats {
  std::uint64_t objects_swept = 0;
  std::uint64_t bytes_swept = 0;
  std::uint64_t objects_live = 0;
  std::uint64_t cycles_completed = 0;
};

struct NurserySnapshot {
  Address start = 0;
  Address free = 0;
  Address top = 0;
  Address limit = 0;
  Address sample_point = 0;
  bool sampling_enabled = false;
  std::uint64_t period = 0;
};

using RootSlot = std::size_t;

namespace detail {

/// Mark-sweep old space: arenas carved into power-of-two cells, one size
/// class per arena, with per-class lists of arenas that still have room.
class OldSpace {
 public:
  void init(std::uint64_t arena_size, std::uint64_t max_bytes);

  Address allocate_cell(std::uint64_t bytes);

  /// Address of an allocated cell holding `addr`, or 0.
  Address cell_base(Address addr) const;

  template <typename Fn>
  void for_each_object(Fn&& fn) const {
    for (const auto& arena : arenas_) {
      for (std::uint32_t i = 0; i < arena.n_cells; ++i) {
        if (arena.used[i])
          fn(reinterpret_cast<Address>(arena.mem.get() + i * arena.cell_size));
      }
    }
  }

  struct SweepResult {
    std::uint64_t objects_swept = 0;
    std::uint64_t bytes_swept = 0;
    std::uint64_t objects_live = 0;
  };
  /// Frees every cell whose header lacks kFlagMarked; clears the mark on
  /// survivors.
  SweepResult sweep();
  void release_empty_arenas();

  std::uint64_t reserved_bytes() const { return reserved_bytes_; }
  std::uint64_t used_bytes() const { return used_bytes_; }

 private:
  struct Arena {
    std::unique_ptr<std::byte[]> mem;
    std::uint32_t cell_size = 0;
    std::uint32_t n_cells = 0;
    std::uint32_t free_cells = 0;
    std::uint32_t next_hint = 0;
    std::uint32_t size_class = 0;
    std::vector<bool> used;
  };

  std::uint32_t class_for(std::uint64_t bytes) const;
  Arena& arena_with_room(std::uint32_t size_class);
  void rebuild_partial_lists();

  std::vector<Arena> arenas_;
  std::vector<std::vector<std::uint32_t>> partial_by_class_;
  std::uint64_t arena_size_ = 0;
  std::uint64_t max_bytes_ = 0;
  std::uint64_t reserved_bytes_ = 0;
  std::uint64_t used_bytes_ = 0;
};

/// Separately allocated blocks for objects above the large-object
/// threshold; never moved, collected by mark-sweep. Generation numbers
/// disambiguate reused block addresses.
class LargeObjectSpace {
 public:
  struct Entry {
    std::unique_ptr<std::byte[]> mem;
    std::uint64_t bytes = 0;
    std::uint64_t generation = 0;
  };

  Address allocate(std::uint64_t bytes, std::uint64_t max_total);
  const Entry* lookup(Address addr) const;

  template <typename Fn>
  void for_each_object(Fn&& fn) const {
    for (const auto& [addr, entry] : objects_) fn(addr);
  }

  OldSpace::SweepResult sweep();

  std::uint64_t total_bytes() const { return total_bytes_; }
  std::size_t object_count() const { return objects_.size(); }

 private:
  std::unordered_map<Address, Entry> objects_;
  std::uint64_t total_bytes_ = 0;
  std::uint64_t next_generation_ = 1;
};

}  // namespace detail

/// The managed heap: a bump-pointer nursery evacuated into a mark-sweep old
/// space by minor collections, a separate large-object space, and the
/// integrated allocation sampler. Single mutator thread; not safe for
/// concurrent use.
class Heap {
 public:
  explicit Heap(const HeapConfig& config, ProfileRecorder* recorder = nullptr);
  Heap(const Heap&) = delete;
  Heap& operator=(const Heap&) = delete;

  // -- allocation ---------------------------------------------------------

  /// Routes to the nursery or the large-object space by charged size.
  Address alloc(std::uint64_t payload_bytes, TypeId type);

  /// Nursery allocation. The body is the whole fast path: bump, compare,
  /// rare slow call, header install. Identical instruction sequence whether
  /// sampling is enabled or not.
  Address allocate(std::uint64_t payload_bytes, TypeId type) {
    const auto bytes = static_cast<Address>(nursery_charge(payload_bytes));
    Address result = nursery_.free;
    nursery_.free = result + bytes;
    if (nursery_.free > nursery_.limit) [[unlikely]] {
      result = collect_and_reserve(bytes);
    }
    install_header(result, type, payload_words_for(payload_bytes));
    return result;
  }

  Address allocate_out_of_nursery(std::uint64_t payload_bytes, TypeId type);

  /// header + payload, word-rounded: the size the nursery cursor moves by.
  static std::uint64_t nursery_charge(std::uint64_t payload_bytes) {
    return kHeaderBytes + payload_words_for(payload_bytes) * kWordBytes;
  }
  /// Large-object sizes are additionally rounded to page_round.
  std::uint64_t large_charge(std::uint64_t payload_bytes) const {
    return round_up(nursery_charge(payload_bytes), config_.page_round);
  }

  // -- sampling -----------------------------------------------------------

  void enable_sampling(std::uint64_t period_bytes);
  void disable_sampling();
  bool sampling_enabled() const { return sampler_.enabled(); }
  std::uint64_t samples_taken() const { return sampler_.samples_taken(); }

  // -- collection ---------------------------------------------------------

  MinorCollectionReport minor_collection();

  /// Advances one phase of the old-space collection cycle
  /// (none -> scanning -> marking -> sweeping -> finalizing -> none) and
  /// returns the phase just executed.
  GcPhase major_collection_step();
  GcPhase gc_phase() const { return phase_; }

  // -- mutator interface --------------------------------------------------

  RootSlot add_root(Address ref);
  void remove_root(RootSlot slot);
  Address root(RootSlot slot) const;
  std::size_t live_root_count() const;

  FieldValue read_field(Address ref, std::uint32_t index) const;
  void write_field(Address ref, std::uint32_t index, FieldValue value);

  // -- introspection ------------------------------------------------------

  NurserySnapshot nursery_state() const;
  bool in_nursery(Address addr) const {
    return addr >= nursery_.start && addr < nursery_.top;
  }
  Address offset_of(Address addr) const { return addr - nursery_.start; }

  /// Best-effort liveness probe used by the fuzz harness to detect
  /// use-after-free through stale handles.
  bool debug_is_live_object(Address addr) const;

  TypeId header_type(Address addr) const { return header_at(addr)->type_id(); }
  std::uint16_t header_flags(Address addr) const {
    return header_at(addr)->flags();
  }
  std::uint32_t payload_word_count(Address addr) const {
    return header_at(addr)->size_words();
  }

  std::uint64_t bytes_allocated_total() const {
    return retired_bytes_ + static_cast<std::uint64_t>(nursery_.free -
                                                       nursery_.start);
  }
  std::uint64_t minor_collection_count() const { return minor_collections_; }
  std::uint64_t old_space_used_bytes() const {
    return old_.used_bytes() + los_.total_bytes();
  }
  std::uint64_t arena_reserved_bytes() const {
    return old_.reserved_bytes() + los_.total_bytes();
  }
  const MajorCycleStats& major_stats() const { return major_stats_; }
  const HeapConfig& config() const { return config_; }

  /// Appends a heap statistics record to the attached recorder.
  void record_heap_stats();

  GcDebugHooks& debug_hooks() { return hooks_; }

 private:
  ObjectHeader* header_at(Address addr) const {
    return reinterpret_cast<ObjectHeader*>(addr);
  }
  std::uint64_t* payload_at(Address addr) const {
    return reinterpret_cast<std::uint64_t*>(addr + kHeaderBytes);
  }
  /// Merges type and size into the header word, preserving GC flag bits the
  /// slow path may already have set (e.g. kFlagSampled on a fresh sample).
  void install_header(Address addr, TypeId type, std::uint64_t words) {
    auto* h = reinterpret_cast<std::uint64_t*>(addr);
    *h = (*h & 0xFFFF0000ull) |
         ObjectHeader::make(type, static_cast<std::uint32_t>(words));
  }

  Address collect_and_reserve(Address bytes);
  void evacuate_nursery(MinorCollectionReport& report);
  Address evacuate_object(Address addr, std::vector<Address>& worklist,
                          MinorCollectionReport& report);
  void scan_copied_fields(Address addr, std::vector<Address>& worklist,
                          MinorCollectionReport& report);
  std::uint64_t resolve_pending_samples();
  void collect_reachable(std::unordered_set<Address>& reachable) const;
  void maybe_auto_major_step();
  void purge_remembered_dead();

  HeapConfig config_;
  GcDebugHooks hooks_;
  std::unique_ptr<std::byte[]> nursery_mem_;
  NurseryCursors nursery_;
  AllocationSampler sampler_;
  ProfileRecorder* recorder_;
  Clock* clock_;
  detail::OldSpace old_;
  detail::LargeObjectSpace los_;
  std::vector<std::uint64_t> roots_;  // raw addresses; 0 = empty slot
  std::vector<RootSlot> free_root_slots_;
  std::unordered_set<Address> remembered_;  // old objects with young fields
  GcPhase phase_ = GcPhase::kNone;
  bool tenure_black_ = false;
  MajorCycleStats major_stats_;
  std::uint64_t minor_collections_ = 0;
  std::uint64_t retired_bytes_ = 0;  // left the nursery or went to LOS
  std::uint64_t major_trigger_bytes_ = 0;
};

}  // namespace gcprof

#endif  // GCPROF_HEAP_HPP
