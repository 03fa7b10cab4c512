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

#ifndef GCPROF_PROFILE_HPP
#define GCPROF_PROFILE_HPP

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <variant>
#include <vector>

#include "gcprof/clock.hpp"
#include "gcprof/common.hpp"
#include "gcprof/object.hpp"
#include "gcprof/registries.hpp"

namespace gcprof {

enum class GcPhase : std::uint8_t {
  kNone = 0,
  kScanning = 1,
  kMarking = 2,
  kSweeping = 3,
  kFinalizing = 4,
};

const char* gc_phase_name(GcPhase phase);

enum class SampleKind : std::uint8_t { kNursery = 0, kLarge = 1 };

enum class Survival : std::uint8_t {
  kDiedYoung = 0,
  kTenured = 1,
  kUnknown = 0xFF,
};

enum class GcEventKind : std::uint8_t { kMinor = 0, kMajorPhase = 1 };

/// One allocation sample: the shadow stack snapshot at sampling time plus
/// the allocation size as charged by the heap. Type and survival are not
/// known yet; they arrive later as a ResolutionRecord.
struct SampleRecord {
  std::uint64_t sample_index = 0;
  std::uint64_t timestamp_ns = 0;
  SampleKind kind = SampleKind::kNursery;
  std::uint64_t alloc_size = 0;
  std::vector<FrameId> stack;  // leaf last

  bool operator==(const SampleRecord&) const = default;
};

struct ResolutionRecord {
  std::uint64_t sample_index = 0;
  TypeId type_id = 0;
  Survival survived = Survival::kUnknown;

  bool operator==(const ResolutionRecord&) const = default;
};

struct HeapStatsRecord {
  std::uint64_t timestamp_ns = 0;
  std::uint64_t total_size_of_arenas = 0;
  std::uint64_t total_memory_used = 0;
  std::uint64_t rss = 0;
  GcPhase gc_phase = GcPhase::kNone;

  bool operator==(const HeapStatsRecord&) const = default;
};

struct GcEventRecord {
  GcEventKind kind = GcEventKind::kMinor;
  GcPhase phase = GcPhase::kNone;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;

  bool operator==(const GcEventRecord&) const = default;
};

using Record =
    std::variant<SampleRecord, ResolutionRecord, HeapStatsRecord, GcEventRecord>;

struct ProfileMeta {
  std::uint64_t sample_n_bytes = 0;  // 0 when sampling was never enabled
  std::uint64_t nursery_size = 0;
  std::uint64_t start_time_ns = 0;

  bool operator==(const ProfileMeta&) const = default;
};

/// The full recorded profile: meta, the append-only record stream in
/// chronological order, and the name tables for type and frame ids.
struct Profile {
  ProfileMeta meta;
  std::vector<Record> records;
  std::vector<std::string> type_names;
  std::vector<std::string> frame_names;

  bool operator==(const Profile&) const = default;

  std::size_t count_of(std::size_t variant_index) const {
    std::size_t n = 0;
    for (const auto& r : records)
      if (r.index() == variant_index) ++n;
    return n;
  }
  std::size_t sample_count() const { return count_of(0); }
  std::size_t resolution_count() const { return count_of(1); }
  std::size_t heap_stats_count() const { return count_of(2); }
  std::size_t gc_event_count() const { return count_of(3); }
};

/// Captures stack samples from the mutator's shadow stack, records heap
/// statistics and GC events, and defers type/survival resolution until the
/// heap reports it after the next minor collection.
class ProfileRecorder {
 public:
  explicit ProfileRecorder(Clock& clock = SteadyClock::instance());

  TypeRegistry& types() { return types_; }
  FrameRegistry& frames() { return frames_; }
  Clock& clock() { return *clock_; }

  // Shadow stack maintained by the running workload.
  FrameId push_frame(std::string_view name);
  void push_frame(FrameId id);
  void pop_frame();
  std::size_t stack_depth() const { return shadow_stack_.size(); }

  /// Appends a SampleRecord snapshotting the current shadow stack. Returns
  /// the sample ordinal.
  std::uint64_t sample_now(SampleKind kind, std::uint64_t alloc_size);

  /// Each sample is resolved exactly once.
  void record_resolution(std::uint64_t sample_index, TypeId type,
                         Survival survived);

  void record_heap_stats(std::uint64_t arenas, std::uint64_t used,
                         GcPhase phase);
  void record_gc_event(GcEventKind kind, GcPhase phase, std::uint64_t start_ns,
                       std::uint64_t end_ns);

  void set_sampling_period(std::uint64_t period) {
    profile_.meta.sample_n_bytes = period;
  }
  void set_nursery_size(std::uint64_t bytes) {
    profile_.meta.nursery_size = bytes;
  }
  void set_rss_provider(std::function<std::uint64_t()> provider) {
    rss_ = std::move(provider);
  }

  std::uint64_t sample_count() const { return next_sample_index_; }
  const Profile& profile() const { return profile_; }

  /// Flushes samples that never saw a minor collection as explicit
  /// unresolved resolutions and copies the name tables into the profile.
  /// Idempotent.
  const Profile& finalize();

 private:
  std::uint64_t now();

  Profile profile_;
  TypeRegistry types_;
  FrameRegistry frames_;
  std::vector<FrameId> shadow_stack_;
  std::unordered_set<std::uint64_t> resolved_;
  std::function<std::uint64_t()> rss_;
  Clock* clock_;
  std::uint64_t next_sample_index_ = 0;
  std::uint64_t last_ts_ = 0;
  bool finalized_ = false;
};

}  // namespace gcprof

#endif  // GCPROF_PROFILE_HPP
