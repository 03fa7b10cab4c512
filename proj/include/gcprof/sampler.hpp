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

#ifndef GCPROF_SAMPLER_HPP
#define GCPROF_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "gcprof/common.hpp"
#include "gcprof/object.hpp"
#include "gcprof/profile.hpp"

namespace gcprof {

/// The four nursery cursors. `limit` is the effective end used by the
/// allocation fast path; `top` is the true end. While sampling is enabled
/// the invariant limit == min(sample_point, top) holds after every public
/// heap operation, so the fast path's single bump-and-compare doubles as
/// the "take a sample now" check.
struct NurseryCursors {
  Address start = 0;
  Address free = 0;
  Address top = 0;
  Address limit = 0;
};

/// Test hooks: seeded bugs used to validate that the fuzz harness's
/// invariant checks actually catch broken implementations. All default to
/// off and none of them touch the allocation fast path.
struct GcDebugHooks {
  bool skip_minor_sample_point_adjust = false;
  bool skip_limit_clamp_on_enable = false;
  bool sample_point_advance_short = false;
  bool skip_large_decrement = false;
  bool skip_root_update_last = false;
  bool invert_survival = false;
  bool corrupt_limit_after_collect = false;
};

/// A sample whose type/survival resolution is still pending. Nursery
/// entries are resolved by inspecting the (possibly forwarded) header at
/// the next minor collection; large entries carry their type up front and
/// are resolved by a reachability check. `los_generation` guards against
/// address reuse after a major sweep.
struct PendingSample {
  Address address = 0;
  std::uint64_t sample_index = 0;
  SampleKind kind = SampleKind::kNursery;
  TypeId type_id = 0;
  std::uint64_t los_generation = 0;
};

/// Maintains the sample point and the bytes-until-sample invariant across
/// nursery allocation, minor collections and out-of-nursery allocations.
///
/// Invariant (whenever enabled, at every quiescent point):
///   sample_point - nursery_free == period - bytes_allocated_since_sample
///
/// The sampler only ever runs on the allocator's slow path; `allocate`
/// itself never consults it.
class AllocationSampler {
 public:
  explicit AllocationSampler(ProfileRecorder* recorder,
                             const GcDebugHooks* hooks)
      : recorder_(recorder), hooks_(hooks) {}

  /// sample_point := nursery_free + period. Re-enabling resets the
  /// countdown.
  void enable(std::uint64_t period_bytes, NurseryCursors& n);

  /// Safe to call when sampling was never enabled; restores limit to top
  /// and never reads the sample point.
  void disable(NurseryCursors& n);

  bool enabled() const { return enabled_; }
  std::uint64_t period() const { return period_; }
  Address sample_point() const { return sample_point_; }
  std::uint64_t samples_taken() const { return samples_taken_; }

  struct Crossing {
    std::uint64_t first_sample_index = 0;
    std::uint32_t count = 0;
  };

  /// Crossing condition established by the caller (nursery: free > limit ==
  /// sample_point; large: sample_point < free after the decrement). Emits
  /// one sample per whole period crossed, advances the sample point by one
  /// period per sample and recomputes the limit. Sample records snapshot
  /// the stack now; the object address is bound separately once known.
  Crossing on_sample_crossing(NurseryCursors& n, SampleKind kind,
                              std::uint64_t alloc_bytes);

  /// sample_point -= rounded_bytes, then the crossing check. Returns the
  /// crossing if one fired. No-op when disabled.
  Crossing on_large_allocation(NurseryCursors& n, std::uint64_t rounded_bytes);

  /// delta = nursery_free before evacuation - nursery_free after; keeps the
  /// countdown invariant across the collection. No-op when disabled.
  void on_minor_collection(Address delta, NurseryCursors& n);

  /// Registers the finally-known object address for every sample of a
  /// crossing, for resolution at the next minor collection.
  void attribute_samples(const Crossing& crossing, Address address,
                         SampleKind kind, TypeId type_for_large,
                         std::uint64_t los_generation);

  std::vector<PendingSample>& pending() { return pending_; }

 private:
  void recompute_limit(NurseryCursors& n) {
    n.limit = enabled_ ? std::min(sample_point_, n.top) : n.top;
  }

  ProfileRecorder* recorder_;
  const GcDebugHooks* hooks_;
  std::vector<PendingSample> pending_;
  Address sample_point_ = 0;
  std::uint64_t period_ = 0;
  std::uint64_t samples_taken_ = 0;
  bool enabled_ = false;
};

}  // namespace gcprof

#endif  // GCPROF_SAMPLER_HPP
