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

#ifndef GCPROF_WORKLOADS_HPP
#define GCPROF_WORKLOADS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gcprof/heap.hpp"
#include "gcprof/profile.hpp"

namespace gcprof {

/// Built-in instrumented workloads. Allocation behavior is deterministic
/// given the parameters; each workload maintains the shadow stack around
/// its functions.
struct WorkloadParams {
  // gcbench_like
  std::uint32_t tree_depth = 14;
  std::uint32_t rounds = 3;
  std::uint64_t node_payload_bytes = 32;  // two refs + two scalar words
  // alloc_loop
  std::uint64_t iterations = 400000;
  std::uint64_t object_payload_bytes = 56;  // charge 64, divides the nursery
  // string_churn
  std::uint64_t churn_iterations = 60000;
  std::uint32_t live_window = 64;
  std::uint64_t churn_seed = 12345;
};

struct WorkloadResult {
  std::uint64_t bytes_allocated = 0;
  std::uint64_t objects_allocated = 0;
  std::uint64_t checksum = 0;  // data dependency so work is not elided
};

std::vector<std::string> workload_names();
bool is_workload(const std::string& name);

WorkloadResult run_workload_body(const std::string& name, Heap& heap,
                                 ProfileRecorder& recorder,
                                 const WorkloadParams& params);

struct RunResult {
  WorkloadResult workload;
  double runtime_seconds = 0;
  std::uint64_t samples = 0;
  std::uint64_t minor_collections = 0;
};

/// Builds a fresh heap + recorder, optionally enables sampling
/// (period_bytes == 0 leaves it disabled), runs the workload and finalizes
/// the profile. `clock` drives profile timestamps; wall time for
/// runtime_seconds is measured separately.
RunResult run_workload(const std::string& name, const WorkloadParams& params,
                       const HeapConfig& config, std::uint64_t period_bytes,
                       Clock& clock, Profile* profile_out = nullptr,
                       bool deterministic_rss = false);

}  // namespace gcprof

#endif  // GCPROF_WORKLOADS_HPP
