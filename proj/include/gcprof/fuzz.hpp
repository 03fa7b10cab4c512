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

#ifndef GCPROF_FUZZ_HPP
#define GCPROF_FUZZ_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gcprof/heap.hpp"

namespace gcprof::fuzz {

// Randomized mutator actions. Allocation actions carry a stable object id
// so shrinking can delete actions without renumbering the rest; actions
// that reference an id that no longer exists become no-ops.
struct AllocObject {
  std::uint32_t id = 0;
  std::uint64_t payload_bytes = 8;
  std::uint32_t ref_fields = 0;
};
struct AllocArray {
  std::uint32_t id = 0;
  std::uint64_t length_words = 1;
};
struct AllocString {
  std::uint32_t id = 0;
  std::uint64_t length_bytes = 1;
};
struct DropRoot {
  std::uint32_t id = 0;
};
struct AccessObject {
  std::uint32_t id = 0;
};
struct ForceMinorCollection {};
struct EnableSampling {
  std::uint64_t period = 0;
};
struct DisableSampling {};

using Action =
    std::variant<AllocObject, AllocArray, AllocString, DropRoot, AccessObject,
                 ForceMinorCollection, EnableSampling, DisableSampling>;

/// Per-allocation counter accumulation: the obvious, slow way to decide
/// whether an allocation should be sampled, normalized to strict-greater
/// crossing semantics. Returns (samples fired, residual counter).
std::pair<std::uint32_t, std::uint64_t> reference_sampler_step(
    std::uint64_t allocated_so_far, std::uint64_t size, std::uint64_t period);

/// Replays only the byte arithmetic of an action stream (charged sizes,
/// enable/disable resets, large-object routing) and predicts per-action
/// sample counts. Independent of the heap implementation.
class OracleReplay {
 public:
  explicit OracleReplay(const HeapConfig& config);
  /// Expected number of samples for this action.
  std::uint32_t on_action(const Action& action);

  bool enabled() const { return enabled_; }
  std::uint64_t period() const { return period_; }
  /// Bytes allocated since the most recent sample (the residual counter).
  std::uint64_t allocated_since_sample() const { return allocated_; }
  /// The charged size of an allocation action, 0 for non-allocations.
  std::uint64_t charged_bytes(const Action& action) const;

 private:
  std::uint64_t threshold_;
  std::uint64_t page_round_;
  bool enabled_ = false;
  std::uint64_t period_ = 0;
  std::uint64_t allocated_ = 0;
};

struct OraclePrediction {
  std::vector<std::uint32_t> per_action_samples;
  std::uint64_t total_samples = 0;
};

OraclePrediction predict_samples(std::span<const Action> actions,
                                 const HeapConfig& config);

struct FuzzFailure {
  std::size_t action_index = 0;
  std::string check;  // which assertion tripped
  std::string detail;
};

struct SequenceResult {
  std::optional<FuzzFailure> failure;
  std::uint64_t samples = 0;
  std::uint64_t minor_collections = 0;
  std::uint64_t uaf_detected = 0;
  std::uint64_t large_allocations = 0;
  std::uint64_t forced_collections = 0;
};

/// Executes the actions against a real heap, asserting after every action:
/// cursor sanity, the limit law, the countdown invariant, per-action sample
/// counts against the oracle, canary integrity for live objects, and that
/// survival resolutions match tracked reachability.
SequenceResult execute_and_check(std::span<const Action> actions,
                                 const HeapConfig& config,
                                 const GcDebugHooks& hooks = {});

std::vector<Action> generate_actions(std::uint64_t seed, std::size_t count,
                                     const HeapConfig& config);

/// Prefix truncation followed by single-action deletion to a fixpoint; the
/// returned sequence still fails.
std::vector<Action> shrink(std::vector<Action> failing,
                           const HeapConfig& config,
                           const GcDebugHooks& hooks = {});

struct FuzzOptions {
  std::uint64_t seed = 0;
  std::uint64_t sequences = 100;
  std::uint64_t actions_per_sequence = 200;
  bool shrink_failures = true;
  HeapConfig heap;

  FuzzOptions();
};

struct FuzzRunReport {
  std::uint64_t sequences_run = 0;
  std::uint64_t actions_run = 0;
  std::uint64_t total_samples = 0;
  std::uint64_t total_minor_collections = 0;
  std::uint64_t sequences_with_sampling = 0;
  std::uint64_t total_large_allocations = 0;
  std::uint64_t total_forced_collections = 0;
  double seconds = 0;
  std::optional<FuzzFailure> failure;
  std::uint64_t failing_seed = 0;
  std::vector<Action> failing_actions;  // shrunk when shrinking is on
};

/// Runs `sequences` independent random sequences; stops at the first
/// failing one.
FuzzRunReport run_fuzz(const FuzzOptions& options,
                       const GcDebugHooks& hooks = {});

// Replay-file format: one action per line.
std::string format_actions(std::span<const Action> actions);
std::vector<Action> parse_actions(std::istream& in);

}  // namespace gcprof::fuzz

#endif  // GCPROF_FUZZ_HPP
