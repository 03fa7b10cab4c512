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

#include "gcprof/sampler.hpp"

#include <algorithm>

namespace gcprof {

void AllocationSampler::enable(std::uint64_t period_bytes, NurseryCursors& n) {
  if (period_bytes == 0)
    throw std::invalid_argument("sampling period must be > 0");
  period_ = period_bytes;
  enabled_ = true;
  sample_point_ = n.free + static_cast<Address>(period_bytes);
  if (recorder_) recorder_->set_sampling_period(period_bytes);
  if (hooks_ && hooks_->skip_limit_clamp_on_enable) {
    n.limit = sample_point_;
    return;
  }
  recompute_limit(n);
}

void AllocationSampler::disable(NurseryCursors& n) {
  // Must be safe when sampling was never enabled: only publishes the
  // always-valid nursery top, never the sample point. Pending samples keep
  // their entries and are still resolved at the next minor collection.
  enabled_ = false;
  n.limit = n.top;
}

AllocationSampler::Crossing AllocationSampler::on_sample_crossing(
    NurseryCursors& n, SampleKind kind, std::uint64_t alloc_bytes) {
  GCPROF_CHECK(enabled_);
  GCPROF_CHECK(sample_point_ < n.free);
  const Address step = (hooks_ && hooks_->sample_point_advance_short)
                           ? static_cast<Address>(period_) - 8
                           : static_cast<Address>(period_);
  Crossing crossing;
  crossing.first_sample_index =
      recorder_ ? recorder_->sample_count() : samples_taken_;
  // One sample per whole period crossed; an allocation larger than the
  // period is sampled more than once.
  do {
    if (recorder_) recorder_->sample_now(kind, alloc_bytes);
    ++samples_taken_;
    ++crossing.count;
    sample_point_ += step;
  } while (sample_point_ < n.free);
  recompute_limit(n);
  return crossing;
}

AllocationSampler::Crossing AllocationSampler::on_large_allocation(
    NurseryCursors& n, std::uint64_t rounded_bytes) {
  if (!enabled_) return {};
  if (!(hooks_ && hooks_->skip_large_decrement))
    sample_point_ -= static_cast<Address>(rounded_bytes);
  Crossing crossing;
  if (sample_point_ < n.free)
    crossing = on_sample_crossing(n, SampleKind::kLarge, rounded_bytes);
  recompute_limit(n);
  return crossing;
}

void AllocationSampler::on_minor_collection(Address delta, NurseryCursors& n) {
  if (!enabled_) return;
  if (!(hooks_ && hooks_->skip_minor_sample_point_adjust))
    sample_point_ -= delta;
  recompute_limit(n);
}

void AllocationSampler::attribute_samples(const Crossing& crossing,
                                          Address address, SampleKind kind,
                                          TypeId type_for_large,
                                          std::uint64_t los_generation) {
  for (std::uint32_t i = 0; i < crossing.count; ++i) {
    pending_.push_back(PendingSample{address, crossing.first_sample_index + i,
                                     kind, type_for_large, los_generation});
  }
}

}  // namespace gcprof
