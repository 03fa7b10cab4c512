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

#include "gcprof/profile.hpp"

#include <fstream>

namespace gcprof {

const char* gc_phase_name(GcPhase phase) {
  switch (phase) {
    case GcPhase::kNone:
      return "none";
    case GcPhase::kScanning:
      return "scanning";
    case GcPhase::kMarking:
      return "marking";
    case GcPhase::kSweeping:
      return "sweeping";
    case GcPhase::kFinalizing:
      return "finalizing";
  }
  return "?";
}

namespace {

std::uint64_t read_rss_from_proc() {
  // statm field 2 is resident pages.
  std::ifstream statm("/proc/self/statm");
  std::uint64_t size_pages = 0, resident_pages = 0;
  if (statm >> size_pages >> resident_pages)
    return resident_pages * 4096;
  return 0;
}

}  // namespace

ProfileRecorder::ProfileRecorder(Clock& clock)
    : rss_(read_rss_from_proc), clock_(&clock) {
  profile_.meta.start_time_ns = now();
}

std::uint64_t ProfileRecorder::now() {
  std::uint64_t t = clock_->now_ns();
  // Timestamps are non-decreasing across the record stream even if the
  // injected clock misbehaves.
  if (t < last_ts_) t = last_ts_;
  last_ts_ = t;
  return t;
}

FrameId ProfileRecorder::push_frame(std::string_view name) {
  FrameId id = frames_.intern(name);
  shadow_stack_.push_back(id);
  return id;
}

void ProfileRecorder::push_frame(FrameId id) { shadow_stack_.push_back(id); }

void ProfileRecorder::pop_frame() {
  GCPROF_CHECK(!shadow_stack_.empty());
  shadow_stack_.pop_back();
}

std::uint64_t ProfileRecorder::sample_now(SampleKind kind,
                                          std::uint64_t alloc_size) {
  SampleRecord rec;
  rec.sample_index = next_sample_index_++;
  rec.timestamp_ns = now();
  rec.kind = kind;
  rec.alloc_size = alloc_size;
  rec.stack = shadow_stack_;
  profile_.records.emplace_back(std::move(rec));
  return next_sample_index_ - 1;
}

void ProfileRecorder::record_resolution(std::uint64_t sample_index, TypeId type,
                                        Survival survived) {
  GCPROF_CHECK(sample_index < next_sample_index_);
  GCPROF_CHECK(resolved_.insert(sample_index).second);
  profile_.records.emplace_back(ResolutionRecord{sample_index, type, survived});
}

void ProfileRecorder::record_heap_stats(std::uint64_t arenas,
                                        std::uint64_t used, GcPhase phase) {
  HeapStatsRecord rec;
  rec.timestamp_ns = now();
  rec.total_size_of_arenas = arenas;
  rec.total_memory_used = used;
  rec.rss = rss_ ? rss_() : 0;
  rec.gc_phase = phase;
  profile_.records.emplace_back(rec);
}

void ProfileRecorder::record_gc_event(GcEventKind kind, GcPhase phase,
                                      std::uint64_t start_ns,
                                      std::uint64_t end_ns) {
  GCPROF_CHECK(start_ns <= end_ns);
  profile_.records.emplace_back(GcEventRecord{kind, phase, start_ns, end_ns});
}

const Profile& ProfileRecorder::finalize() {
  if (finalized_) return profile_;
  // Samples the program never carried through a minor collection are
  // flushed with the explicit unresolved sentinel rather than forcing a
  // final collection on the workload under measurement.
  for (std::uint64_t i = 0; i < next_sample_index_; ++i) {
    if (!resolved_.contains(i))
      record_resolution(i, 0, Survival::kUnknown);
  }
  profile_.type_names = types_.names();
  profile_.frame_names = frames_.names();
  finalized_ = true;
  return profile_;
}

}  // namespace gcprof
