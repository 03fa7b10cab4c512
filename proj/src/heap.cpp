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

#include "gcprof/heap.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

namespace gcprof {

namespace {

constexpr std::uint32_t kMinCellBytes = 16;  // header + one payload word

std::uint32_t log2_u64(std::uint64_t v) {
  return 63u - static_cast<std::uint32_t>(std::countl_zero(v));
}

}  // namespace

HeapConfig HeapConfig::finalized() const {
  HeapConfig c = *this;
  if (c.word_size != kWordBytes)
    throw std::invalid_argument("word_size must be 8");
  if (c.nursery_size < 256 || !std::has_single_bit(c.nursery_size))
    throw std::invalid_argument("nursery_size must be a power of two >= 256");
  if (c.large_object_threshold == 0)
    c.large_object_threshold = c.nursery_size / 8;
  if (c.large_object_threshold >= c.nursery_size)
    throw std::invalid_argument("large_object_threshold must be < nursery");
  if (c.large_object_threshold < kMinCellBytes)
    throw std::invalid_argument("large_object_threshold too small");
  if (c.page_round < kWordBytes || c.page_round % kWordBytes != 0)
    throw std::invalid_argument("page_round must be a multiple of 8");
  if (c.old_arena_size == 0) {
    c.old_arena_size =
        std::max<std::uint64_t>(64 << 10, std::bit_ceil(c.large_object_threshold));
  }
  // The largest tenured object (a full-threshold nursery survivor) must fit
  // one old-space cell.
  if (std::bit_ceil(c.large_object_threshold) > std::bit_floor(c.old_arena_size))
    throw std::invalid_argument("old_arena_size too small for the threshold");
  return c;
}

namespace detail {

// ---------------------------------------------------------------------------
// OldSpace

void OldSpace::init(std::uint64_t arena_size, std::uint64_t max_bytes) {
  arena_size_ = arena_size;
  max_bytes_ = max_bytes;
  const std::uint32_t n_classes = log2_u64(arena_size) - 3;  // 16 .. arena
  partial_by_class_.resize(n_classes);
}

std::uint32_t OldSpace::class_for(std::uint64_t bytes) const {
  const std::uint64_t cell = std::bit_ceil(std::max<std::uint64_t>(bytes, kMinCellBytes));
  const std::uint32_t cls = log2_u64(cell) - 4;
  GCPROF_CHECK(cls < partial_by_class_.size());
  return cls;
}

OldSpace::Arena& OldSpace::arena_with_room(std::uint32_t size_class) {
  auto& partial = partial_by_class_[size_class];
  while (!partial.empty()) {
    Arena& a = arenas_[partial.back()];
    if (a.free_cells > 0 && a.mem) return a;
    partial.pop_back();
  }
  if (max_bytes_ != 0 && reserved_bytes_ + arena_size_ > max_bytes_)
    throw OutOfMemory("old space cannot grow beyond max_heap_bytes");
  Arena a;
  a.cell_size = 16u << size_class;
  a.n_cells = static_cast<std::uint32_t>(arena_size_ / a.cell_size);
  a.free_cells = a.n_cells;
  a.size_class = size_class;
  a.used.assign(a.n_cells, false);
  a.mem = std::make_unique<std::byte[]>(arena_size_);
  std::memset(a.mem.get(), 0, arena_size_);
  reserved_bytes_ += arena_size_;
  arenas_.push_back(std::move(a));
  partial.push_back(static_cast<std::uint32_t>(arenas_.size() - 1));
  return arenas_.back();
}

Address OldSpace::allocate_cell(std::uint64_t bytes) {
  Arena& a = arena_with_room(class_for(bytes));
  std::uint32_t i = a.next_hint;
  while (a.used[i]) i = (i + 1) % a.n_cells;
  a.used[i] = true;
  a.next_hint = (i + 1) % a.n_cells;
  --a.free_cells;
  used_bytes_ += a.cell_size;
  std::byte* cell = a.mem.get() + static_cast<std::uint64_t>(i) * a.cell_size;
  std::memset(cell, 0, a.cell_size);
  return reinterpret_cast<Address>(cell);
}

Address OldSpace::cell_base(Address addr) const {
  for (const auto& a : arenas_) {
    if (!a.mem) continue;
    const Address base = reinterpret_cast<Address>(a.mem.get());
    if (addr < base || addr >= base + static_cast<Address>(arena_size_))
      continue;
    const std::uint64_t off = static_cast<std::uint64_t>(addr - base);
    const std::uint32_t i = static_cast<std::uint32_t>(off / a.cell_size);
    return a.used[i] ? base + static_cast<Address>(i) * a.cell_size : 0;
  }
  return 0;
}

OldSpace::SweepResult OldSpace::sweep() {
  SweepResult result;
  for (auto& a : arenas_) {
    if (!a.mem) continue;
    for (std::uint32_t i = 0; i < a.n_cells; ++i) {
      if (!a.used[i]) continue;
      auto* hdr = reinterpret_cast<ObjectHeader*>(
          a.mem.get() + static_cast<std::uint64_t>(i) * a.cell_size);
      if (hdr->has_flags(kFlagMarked)) {
        hdr->clear_flags(kFlagMarked);
        ++result.objects_live;
      } else {
        a.used[i] = false;
        ++a.free_cells;
        used_bytes_ -= a.cell_size;
        ++result.objects_swept;
        result.bytes_swept += a.cell_size;
      }
    }
  }
  rebuild_partial_lists();
  return result;
}

void OldSpace::release_empty_arenas() {
  for (auto& a : arenas_) {
    if (a.mem && a.free_cells == a.n_cells) {
      a.mem.reset();
      reserved_bytes_ -= arena_size_;
    }
  }
  rebuild_partial_lists();
}

void OldSpace::rebuild_partial_lists() {
  for (auto& list : partial_by_class_) list.clear();
  for (std::size_t i = 0; i < arenas_.size(); ++i) {
    const Arena& a = arenas_[i];
    if (a.mem && a.free_cells > 0)
      partial_by_class_[a.size_class].push_back(static_cast<std::uint32_t>(i));
  }
}

// ---------------------------------------------------------------------------
// LargeObjectSpace

Address LargeObjectSpace::allocate(std::uint64_t bytes,
                                   std::uint64_t max_total) {
  if (max_total != 0 && total_bytes_ + bytes > max_total)
    throw OutOfMemory("large-object space cannot grow beyond max_heap_bytes");
  Entry entry;
  entry.mem = std::make_unique<std::byte[]>(bytes);
  entry.bytes = bytes;
  entry.generation = next_generation_++;
  std::memset(entry.mem.get(), 0, bytes);
  const Address addr = reinterpret_cast<Address>(entry.mem.get());
  total_bytes_ += bytes;
  objects_.emplace(addr, std::move(entry));
  return addr;
}

const LargeObjectSpace::Entry* LargeObjectSpace::lookup(Address addr) const {
  auto it = objects_.find(addr);
  return it == objects_.end() ? nullptr : &it->second;
}

OldSpace::SweepResult LargeObjectSpace::sweep() {
  OldSpace::SweepResult result;
  for (auto it = objects_.begin(); it != objects_.end();) {
    auto* hdr = reinterpret_cast<ObjectHeader*>(it->second.mem.get());
    if (hdr->has_flags(kFlagMarked)) {
      hdr->clear_flags(kFlagMarked);
      ++result.objects_live;
      ++it;
    } else {
      ++result.objects_swept;
      result.bytes_swept += it->second.bytes;
      total_bytes_ -= it->second.bytes;
      it = objects_.erase(it);
    }
  }
  return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heap

Heap::Heap(const HeapConfig& config, ProfileRecorder* recorder)
    : config_(config.finalized()),
      sampler_(recorder, &hooks_),
      recorder_(recorder),
      clock_(recorder ? &recorder->clock() : &SteadyClock::instance()),
      major_trigger_bytes_(config_.major_collection_threshold) {
  // Small slack after nursery_top keeps the seeded cursor-corruption test
  // hooks memory-safe.
  nursery_mem_ = std::make_unique<std::byte[]>(config_.nursery_size + 64);
  std::memset(nursery_mem_.get(), 0, config_.nursery_size + 64);
  nursery_.start = reinterpret_cast<Address>(nursery_mem_.get());
  nursery_.free = nursery_.start;
  nursery_.top = nursery_.start + static_cast<Address>(config_.nursery_size);
  nursery_.limit = nursery_.top;
  old_.init(config_.old_arena_size, config_.max_heap_bytes);
  if (recorder_) recorder_->set_nursery_size(config_.nursery_size);
}

Address Heap::alloc(std::uint64_t payload_bytes, TypeId type) {
  if (nursery_charge(payload_bytes) > config_.large_object_threshold)
    return allocate_out_of_nursery(payload_bytes, type);
  return allocate(payload_bytes, type);
}

Address Heap::allocate_out_of_nursery(std::uint64_t payload_bytes,
                                      TypeId type) {
  const std::uint64_t charge = large_charge(payload_bytes);
  GCPROF_CHECK(charge > config_.large_object_threshold);
  const Address addr = los_.allocate(
      charge, config_.max_heap_bytes == 0
                  ? 0
                  : config_.max_heap_bytes - old_.reserved_bytes());
  install_header(addr, type, payload_words_for(payload_bytes));
  header_at(addr)->or_flags(
      static_cast<std::uint16_t>(kFlagTenured | (tenure_black_ ? kFlagMarked : 0)));
  retired_bytes_ += charge;
  // The nursery cursor does not move for an out-of-nursery allocation, so
  // the sampler keeps its invariant by moving the sample point left instead.
  auto crossing = sampler_.on_large_allocation(nursery_, charge);
  if (crossing.count > 0) {
    const auto* entry = los_.lookup(addr);
    sampler_.attribute_samples(crossing, addr, SampleKind::kLarge, type,
                               entry->generation);
    header_at(addr)->or_flags(kFlagSampled);
  }
  return addr;
}

Address Heap::collect_and_reserve(Address bytes) {
  GCPROF_CHECK(bytes <= nursery_.top - nursery_.start);
  // The bump in allocate already moved nursery_free past nursery_limit.
  // That can mean two things: we crossed the sample point, or the nursery
  // is genuinely full. Check the sample point first.
  std::optional<AllocationSampler::Crossing> deferred;
  if (sampler_.enabled() && nursery_.limit == sampler_.sample_point()) {
    auto crossing = sampler_.on_sample_crossing(nursery_, SampleKind::kNursery,
                                                static_cast<std::uint64_t>(bytes));
    if (nursery_.free <= nursery_.limit) {
      // Enough room: no collection. nursery_free was already incremented in
      // allocate, so the object starts `bytes` below it.
      const Address result = nursery_.free - bytes;
      sampler_.attribute_samples(crossing, result, SampleKind::kNursery, 0, 0);
      header_at(result)->or_flags(kFlagSampled);
      return result;
    }
    // The nursery is also full; bind the sample to the object's final
    // address once the collection has made room.
    deferred = crossing;
  }

  // Roll back the speculative bump so the collection sees exactly the bytes
  // that were actually allocated, then evacuate and retry the reservation.
  nursery_.free -= bytes;
  minor_collection();
  const Address result = nursery_.free;
  nursery_.free += bytes;
  if (deferred) {
    // The crossing already advanced the point past the pre-collection free
    // cursor, so the evacuation adjustment cannot leave it below the
    // reservation.
    GCPROF_CHECK(nursery_.free <= nursery_.limit);
    sampler_.attribute_samples(*deferred, result, SampleKind::kNursery, 0, 0);
    header_at(result)->or_flags(kFlagSampled);
  } else if (nursery_.free > nursery_.limit) {
    // The evacuation dragged the sample point down into the first `bytes`
    // of the nursery; this reservation crosses it.
    GCPROF_CHECK(sampler_.enabled() && nursery_.limit == sampler_.sample_point());
    auto crossing = sampler_.on_sample_crossing(nursery_, SampleKind::kNursery,
                                                static_cast<std::uint64_t>(bytes));
    sampler_.attribute_samples(crossing, result, SampleKind::kNursery, 0, 0);
    header_at(result)->or_flags(kFlagSampled);
    GCPROF_CHECK(nursery_.free <= nursery_.limit);
  }
  return result;
}

void Heap::enable_sampling(std::uint64_t period_bytes) {
  sampler_.enable(period_bytes, nursery_);
}

void Heap::disable_sampling() { sampler_.disable(nursery_); }

RootSlot Heap::add_root(Address ref) {
  GCPROF_CHECK(ref != 0 && (ref & 7) == 0);
  if (!free_root_slots_.empty()) {
    RootSlot slot = free_root_slots_.back();
    free_root_slots_.pop_back();
    roots_[slot] = static_cast<std::uint64_t>(ref);
    return slot;
  }
  roots_.push_back(static_cast<std::uint64_t>(ref));
  return roots_.size() - 1;
}

void Heap::remove_root(RootSlot slot) {
  GCPROF_CHECK(slot < roots_.size() && roots_[slot] != 0);
  roots_[slot] = 0;
  free_root_slots_.push_back(slot);
}

Address Heap::root(RootSlot slot) const {
  GCPROF_CHECK(slot < roots_.size());
  return static_cast<Address>(roots_[slot]);
}

std::size_t Heap::live_root_count() const {
  std::size_t n = 0;
  for (auto v : roots_)
    if (v != 0) ++n;
  return n;
}

FieldValue Heap::read_field(Address ref, std::uint32_t index) const {
  const ObjectHeader* hdr = header_at(ref);
  GCPROF_CHECK(!hdr->has_flags(kFlagForwarded));
  GCPROF_CHECK(index < hdr->size_words());
  return FieldValue::from_raw(payload_at(ref)[index]);
}

void Heap::write_field(Address ref, std::uint32_t index, FieldValue value) {
  ObjectHeader* hdr = header_at(ref);
  GCPROF_CHECK(!hdr->has_flags(kFlagForwarded));
  GCPROF_CHECK(index < hdr->size_words());
  payload_at(ref)[index] = value.raw();
  // Remembered set: an old object now pointing at a young one must be a
  // root of the next minor collection.
  if (value.is_ref() && !value.is_null() && !in_nursery(ref) &&
      in_nursery(value.as_ref())) {
    remembered_.insert(ref);
  }
}

NurserySnapshot Heap::nursery_state() const {
  NurserySnapshot s;
  s.start = nursery_.start;
  s.free = nursery_.free;
  s.top = nursery_.top;
  s.limit = nursery_.limit;
  s.sample_point = sampler_.sample_point();
  s.sampling_enabled = sampler_.enabled();
  s.period = sampler_.period();
  return s;
}

bool Heap::debug_is_live_object(Address addr) const {
  if (addr == 0 || (addr & 7) != 0) return false;
  if (in_nursery(addr)) {
    if (addr >= nursery_.free) return false;
    const ObjectHeader* hdr = header_at(addr);
    if (hdr->has_flags(kFlagForwarded)) return false;
    if (hdr->size_words() == 0) return false;
    return addr + static_cast<Address>(kHeaderBytes +
                                       hdr->size_words() * kWordBytes) <=
           nursery_.free;
  }
  if (los_.lookup(addr) != nullptr) return true;
  return old_.cell_base(addr) == addr;
}

// -- minor collection --------------------------------------------------------

Address Heap::evacuate_object(Address addr, std::vector<Address>& worklist,
                              MinorCollectionReport& report) {
  ObjectHeader* hdr = header_at(addr);
  if (hdr->has_flags(kFlagForwarded))
    return static_cast<Address>(payload_at(addr)[0]);
  const std::uint64_t bytes = kHeaderBytes + hdr->size_words() * kWordBytes;
  const Address copy = old_.allocate_cell(bytes);
  std::memcpy(reinterpret_cast<void*>(copy), reinterpret_cast<void*>(addr),
              bytes);
  ObjectHeader* copy_hdr = header_at(copy);
  copy_hdr->clear_flags(kFlagSampled);
  copy_hdr->or_flags(static_cast<std::uint16_t>(
      kFlagTenured | (tenure_black_ ? kFlagMarked : 0)));
  hdr->or_flags(kFlagForwarded);
  payload_at(addr)[0] = static_cast<std::uint64_t>(copy);
  report.bytes_copied += bytes;
  report.objects_copied += 1;
  worklist.push_back(copy);
  return copy;
}

void Heap::scan_copied_fields(Address addr, std::vector<Address>& worklist,
                              MinorCollectionReport& report) {
  ObjectHeader* hdr = header_at(addr);
  std::uint64_t* payload = payload_at(addr);
  for (std::uint32_t i = 0; i < hdr->size_words(); ++i) {
    const std::uint64_t w = payload[i];
    if (raw_word_is_ref(w) && in_nursery(static_cast<Address>(w)))
      payload[i] = static_cast<std::uint64_t>(
          evacuate_object(static_cast<Address>(w), worklist, report));
  }
}

void Heap::evacuate_nursery(MinorCollectionReport& report) {
  std::vector<Address> worklist;
  const std::size_t skip_last_root =
      hooks_.skip_root_update_last && !roots_.empty() ? roots_.size() - 1
                                                      : roots_.size();
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    const Address ref = static_cast<Address>(roots_[i]);
    if (ref == 0 || !in_nursery(ref)) continue;
    const Address copy = evacuate_object(ref, worklist, report);
    if (i != skip_last_root)
      roots_[i] = static_cast<std::uint64_t>(copy);
  }
  for (Address old_obj : remembered_)
    scan_copied_fields(old_obj, worklist, report);
  while (!worklist.empty()) {
    const Address obj = worklist.back();
    worklist.pop_back();
    scan_copied_fields(obj, worklist, report);
  }
}

MinorCollectionReport Heap::minor_collection() {
  MinorCollectionReport report;
  report.start_ns = clock_->now_ns();
  const Address used = nursery_.free - nursery_.start;
  report.nursery_used_bytes = static_cast<std::uint64_t>(used);

  evacuate_nursery(report);
  report.samples_resolved = resolve_pending_samples();
  // After evacuation no old object can point into the (empty) nursery.
  remembered_.clear();

  std::memset(reinterpret_cast<void*>(nursery_.start), 0,
              static_cast<std::size_t>(used));
  nursery_.free = nursery_.start;
  retired_bytes_ += static_cast<std::uint64_t>(used);
  sampler_.on_minor_collection(used, nursery_);
  if (!sampler_.enabled()) nursery_.limit = nursery_.top;
  if (hooks_.corrupt_limit_after_collect) nursery_.limit = nursery_.top + 8;
  ++minor_collections_;

  report.end_ns = clock_->now_ns();
  if (recorder_) {
    record_heap_stats();
    recorder_->record_gc_event(GcEventKind::kMinor, GcPhase::kNone,
                               report.start_ns, report.end_ns);
  }
  maybe_auto_major_step();
  return report;
}

std::uint64_t Heap::resolve_pending_samples() {
  auto& pending = sampler_.pending();
  if (pending.empty()) return 0;

  bool any_large = false;
  for (const auto& p : pending)
    if (p.kind == SampleKind::kLarge) any_large = true;
  std::unordered_set<Address> reachable;
  if (any_large) collect_reachable(reachable);

  std::uint64_t resolved = 0;
  for (const auto& p : pending) {
    TypeId type = 0;
    Survival survived = Survival::kUnknown;
    if (p.kind == SampleKind::kNursery) {
      if (!in_nursery(p.address))
        throw HeapCorruption("sampled nursery address out of range");
      const ObjectHeader* hdr = header_at(p.address);
      if (hdr->has_flags(kFlagForwarded)) {
        const Address copy = static_cast<Address>(payload_at(p.address)[0]);
        type = header_at(copy)->type_id();
        header_at(copy)->clear_flags(kFlagSampled);
        survived = Survival::kTenured;
      } else {
        // The dead header is still intact in the nursery until the memset.
        type = hdr->type_id();
        survived = Survival::kDiedYoung;
      }
    } else {
      type = p.type_id;
      const auto* entry = los_.lookup(p.address);
      const bool alive = entry != nullptr && entry->generation == p.los_generation;
      survived = alive && reachable.contains(p.address) ? Survival::kTenured
                                                        : Survival::kDiedYoung;
      if (alive) header_at(p.address)->clear_flags(kFlagSampled);
    }
    if (hooks_.invert_survival)
      survived = survived == Survival::kTenured ? Survival::kDiedYoung
                                                : Survival::kTenured;
    if (recorder_) recorder_->record_resolution(p.sample_index, type, survived);
    ++resolved;
  }
  pending.clear();
  return resolved;
}

void Heap::collect_reachable(std::unordered_set<Address>& reachable) const {
  // Root-reachability over old + large objects; runs after evacuation so no
  // live reference points into the nursery. Uses a side set, not header
  // bits, so it cannot disturb an in-progress major cycle's mark state.
  std::vector<Address> stack;
  for (auto v : roots_)
    if (v != 0) stack.push_back(static_cast<Address>(v));
  while (!stack.empty()) {
    const Address obj = stack.back();
    stack.pop_back();
    if (!reachable.insert(obj).second) continue;
    const ObjectHeader* hdr = header_at(obj);
    const std::uint64_t* payload = payload_at(obj);
    for (std::uint32_t i = 0; i < hdr->size_words(); ++i) {
      if (raw_word_is_ref(payload[i]))
        stack.push_back(static_cast<Address>(payload[i]));
    }
  }
}

// -- major collection --------------------------------------------------------

void Heap::maybe_auto_major_step() {
  if (phase_ != GcPhase::kNone) {
    major_collection_step();
  } else if (old_space_used_bytes() > major_trigger_bytes_) {
    major_collection_step();
  }
}

void Heap::purge_remembered_dead() {
  for (auto it = remembered_.begin(); it != remembered_.end();) {
    const bool alive =
        los_.lookup(*it) != nullptr || old_.cell_base(*it) == *it;
    it = alive ? std::next(it) : remembered_.erase(it);
  }
}

GcPhase Heap::major_collection_step() {
  const std::uint64_t start = clock_->now_ns();
  GcPhase executed = GcPhase::kNone;
  switch (phase_) {
    case GcPhase::kNone: {
      // Fresh cycle: drop stale mark bits so the marking step starts clean.
      old_.for_each_object(
          [&](Address a) { header_at(a)->clear_flags(kFlagMarked); });
      los_.for_each_object(
          [&](Address a) { header_at(a)->clear_flags(kFlagMarked); });
      major_stats_ = MajorCycleStats{
          0, 0, 0, major_stats_.cycles_completed};
      executed = phase_ = GcPhase::kScanning;
      break;
    }
    case GcPhase::kScanning: {
      // Mark the full transitive closure from the current roots. Nursery
      // objects are not subject to mark-sweep but are traversed because
      // they can hold the only reference to an old object.
      std::vector<Address> stack;
      std::vector<Address> scratch_marked;
      for (auto v : roots_)
        if (v != 0) stack.push_back(static_cast<Address>(v));
      while (!stack.empty()) {
        const Address obj = stack.back();
        stack.pop_back();
        ObjectHeader* hdr = header_at(obj);
        if (in_nursery(obj)) {
          if (hdr->has_flags(kFlagScratch)) continue;
          hdr->or_flags(kFlagScratch);
          scratch_marked.push_back(obj);
        } else {
          if (hdr->has_flags(kFlagMarked)) continue;
          hdr->or_flags(kFlagMarked);
        }
        const std::uint64_t* payload = payload_at(obj);
        for (std::uint32_t i = 0; i < hdr->size_words(); ++i)
          if (raw_word_is_ref(payload[i]))
            stack.push_back(static_cast<Address>(payload[i]));
      }
      for (Address a : scratch_marked) header_at(a)->clear_flags(kFlagScratch);
      // From here until the sweep finishes, objects entering the old space
      // are allocated marked so the sweep cannot free them.
      tenure_black_ = true;
      executed = phase_ = GcPhase::kMarking;
      break;
    }
    case GcPhase::kMarking: {
      auto old_result = old_.sweep();
      auto los_result = los_.sweep();
      major_stats_.objects_swept = old_result.objects_swept + los_result.objects_swept;
      major_stats_.bytes_swept = old_result.bytes_swept + los_result.bytes_swept;
      major_stats_.objects_live = old_result.objects_live + los_result.objects_live;
      purge_remembered_dead();
      tenure_black_ = false;
      executed = phase_ = GcPhase::kSweeping;
      break;
    }
    case GcPhase::kSweeping: {
      old_.release_empty_arenas();
      major_trigger_bytes_ = std::max(config_.major_collection_threshold,
                                      2 * old_space_used_bytes());
      major_stats_.cycles_completed += 1;
      executed = GcPhase::kFinalizing;
      phase_ = GcPhase::kNone;
      break;
    }
    case GcPhase::kFinalizing:
      // Unreachable: the finalizing step resets the phase to none.
      GCPROF_CHECK(false);
  }
  const std::uint64_t end = clock_->now_ns();
  if (recorder_)
    recorder_->record_gc_event(GcEventKind::kMajorPhase, executed, start, end);
  return executed;
}

void Heap::record_heap_stats() {
  if (!recorder_) return;
  recorder_->record_heap_stats(arena_reserved_bytes(), old_space_used_bytes(),
                               phase_);
}

}  // namespace gcprof
