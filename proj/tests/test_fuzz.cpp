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

#include <doctest.h>

#include <sstream>

#include "gcprof/fuzz.hpp"

using namespace gcprof;
using namespace gcprof::fuzz;

namespace {

HeapConfig fuzz_config() {
  HeapConfig config;
  config.nursery_size = 64 << 10;
  config.major_collection_threshold = 256 << 10;
  return config;
}

}  // namespace

TEST_CASE("reference sampler accumulates and fires on strict crossings") {
  // Landing exactly on the boundary does not fire.
  CHECK(reference_sampler_step(0, 256, 256) ==
        std::pair<std::uint32_t, std::uint64_t>{0, 256});
  CHECK(reference_sampler_step(192, 65, 256) ==
        std::pair<std::uint32_t, std::uint64_t>{1, 1});
  CHECK(reference_sampler_step(0, 600, 256) ==
        std::pair<std::uint32_t, std::uint64_t>{2, 88});
  CHECK(reference_sampler_step(0, 200, 64) ==
        std::pair<std::uint32_t, std::uint64_t>{3, 8});
}

TEST_CASE("oracle charge arithmetic matches the heap's") {
  HeapConfig config;
  config.nursery_size = 4096;
  config.large_object_threshold = 512;
  config.page_round = 64;
  const HeapConfig cfg = config.finalized();
  OracleReplay oracle(cfg);
  Heap heap(cfg);

  for (std::uint64_t payload = 1; payload <= 2200; payload += 7) {
    const Action action = AllocString{0, payload};
    const std::uint64_t heap_charge =
        Heap::nursery_charge(payload) > cfg.large_object_threshold
            ? heap.large_charge(payload)
            : Heap::nursery_charge(payload);
    CHECK(oracle.charged_bytes(action) == heap_charge);
  }
}

TEST_CASE("predict_samples replays enable resets and rounding") {
  const HeapConfig cfg = fuzz_config();

  SUBCASE("no enable action means no samples") {
    std::vector<Action> actions = {AllocObject{0, 100, 0}, AllocString{1, 50},
                                   ForceMinorCollection{}};
    const auto prediction = predict_samples(actions, cfg);
    CHECK(prediction.total_samples == 0);
  }

  SUBCASE("four 72-byte charges against period 256 fire on the fourth") {
    std::vector<Action> actions = {EnableSampling{256}};
    for (std::uint32_t i = 0; i < 4; ++i)
      actions.push_back(AllocObject{i, 64, 0});  // charge 72
    const auto prediction = predict_samples(actions, cfg);
    CHECK(prediction.per_action_samples ==
          std::vector<std::uint32_t>{0, 0, 0, 0, 1});
  }

  SUBCASE("period equal to the nursery samples on the overflowing allocation") {
    std::vector<Action> actions = {EnableSampling{cfg.nursery_size}};
    const std::uint64_t per_alloc = 64;  // payload 56
    const std::uint64_t fills = cfg.nursery_size / per_alloc;
    for (std::uint64_t i = 0; i <= fills; ++i)
      actions.push_back(AllocObject{static_cast<std::uint32_t>(i), 56, 0});
    const auto prediction = predict_samples(actions, cfg);
    CHECK(prediction.total_samples == 1);
    CHECK(prediction.per_action_samples.back() == 1);
  }

  SUBCASE("disable stops counting; re-enable resets the countdown") {
    std::vector<Action> actions = {
        EnableSampling{100}, AllocObject{0, 56, 0},  // 64 bytes
        DisableSampling{},   AllocObject{1, 500, 0}, // not counted
        EnableSampling{100}, AllocObject{2, 56, 0},  // 64: no crossing
        AllocObject{3, 56, 0},                       // 128 > 100: fires
    };
    const auto prediction = predict_samples(actions, cfg);
    CHECK(prediction.per_action_samples ==
          std::vector<std::uint32_t>{0, 0, 0, 0, 0, 0, 1});
  }
}

TEST_CASE("execute_and_check passes on clean generated sequences") {
  const HeapConfig cfg = fuzz_config();
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto actions = generate_actions(seed, 150, cfg);
    const auto result = execute_and_check(actions, cfg);
    REQUIRE_MESSAGE(!result.failure.has_value(),
                    (result.failure ? result.failure->detail : ""));
  }
}

TEST_CASE("disable as the very first action is harmless") {
  std::vector<Action> actions = {DisableSampling{}, AllocObject{0, 56, 0},
                                 ForceMinorCollection{}, DisableSampling{}};
  const auto result = execute_and_check(actions, fuzz_config());
  CHECK(!result.failure.has_value());
}

TEST_CASE("stale accesses after a collection are reported as use-after-free") {
  std::vector<Action> actions = {AllocObject{0, 56, 0}, DropRoot{0},
                                 ForceMinorCollection{}, AccessObject{0}};
  const auto result = execute_and_check(actions, fuzz_config());
  CHECK(!result.failure.has_value());
  CHECK(result.uaf_detected == 1);
}

TEST_CASE("an access before the collection still sees the dropped object") {
  std::vector<Action> actions = {AllocObject{0, 56, 0}, DropRoot{0},
                                 AccessObject{0}};
  const auto result = execute_and_check(actions, fuzz_config());
  CHECK(!result.failure.has_value());
  CHECK(result.uaf_detected == 0);
}

TEST_CASE("seeded implementation bugs are caught by the right assertion") {
  const HeapConfig cfg = fuzz_config();

  SUBCASE("skipping the collection adjustment breaks the countdown") {
    GcDebugHooks hooks;
    hooks.skip_minor_sample_point_adjust = true;
    std::vector<Action> actions = {EnableSampling{256}, AllocObject{0, 56, 0},
                                   ForceMinorCollection{}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK(result.failure->check == "countdown-invariant");
  }

  SUBCASE("an unclamped enable breaks the limit law") {
    GcDebugHooks hooks;
    hooks.skip_limit_clamp_on_enable = true;
    std::vector<Action> actions = {EnableSampling{4 * cfg.nursery_size}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK((result.failure->check == "limit-law" ||
           result.failure->check == "cursor-sanity"));
  }

  SUBCASE("a short sample-point advance diverges from the oracle") {
    GcDebugHooks hooks;
    hooks.sample_point_advance_short = true;
    std::vector<Action> actions = {EnableSampling{64}};
    for (std::uint32_t i = 0; i < 8; ++i)
      actions.push_back(AllocObject{i, 56, 0});
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK((result.failure->check == "countdown-invariant" ||
           result.failure->check == "sample-count" ||
           result.failure->check == "limit-law"));
  }

  SUBCASE("ignoring large allocations diverges from the oracle") {
    GcDebugHooks hooks;
    hooks.skip_large_decrement = true;
    std::vector<Action> actions = {
        EnableSampling{256},
        AllocString{0, cfg.finalized().large_object_threshold * 2}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK((result.failure->check == "sample-count" ||
           result.failure->check == "countdown-invariant"));
  }

  SUBCASE("a stale root after evacuation is a use-after-free on a live object") {
    GcDebugHooks hooks;
    hooks.skip_root_update_last = true;
    std::vector<Action> actions = {AllocObject{0, 56, 0},
                                   ForceMinorCollection{}, AccessObject{0}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK(result.failure->check == "use-after-free");
  }

  SUBCASE("inverted survival flags contradict tracked reachability") {
    GcDebugHooks hooks;
    hooks.invert_survival = true;
    std::vector<Action> actions = {EnableSampling{32}, AllocObject{0, 56, 0},
                                   ForceMinorCollection{}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK(result.failure->check == "survival-resolution");
  }

  SUBCASE("a corrupted limit after collection violates cursor sanity") {
    GcDebugHooks hooks;
    hooks.corrupt_limit_after_collect = true;
    std::vector<Action> actions = {ForceMinorCollection{}};
    const auto result = execute_and_check(actions, cfg, hooks);
    REQUIRE(result.failure.has_value());
    CHECK((result.failure->check == "cursor-sanity" ||
           result.failure->check == "limit-law"));
  }
}

TEST_CASE("shrinking returns a minimal sequence that still fails") {
  const HeapConfig cfg = fuzz_config();
  GcDebugHooks hooks;
  hooks.skip_minor_sample_point_adjust = true;

  // Pad a failing core with unrelated actions.
  std::vector<Action> actions = {
      AllocObject{10, 100, 0}, AllocString{11, 40},   EnableSampling{256},
      AccessObject{10},        AllocObject{0, 56, 0}, DropRoot{11},
      ForceMinorCollection{},  AllocArray{12, 4},     AccessObject{10},
  };
  REQUIRE(execute_and_check(actions, cfg, hooks).failure.has_value());

  const auto shrunk = shrink(actions, cfg, hooks);
  CHECK(shrunk.size() < actions.size());
  CHECK(shrunk.size() <= 3);  // enable + alloc + minor is the core
  const auto result = execute_and_check(shrunk, cfg, hooks);
  REQUIRE(result.failure.has_value());
  CHECK(result.failure->check == "countdown-invariant");
}

TEST_CASE("replay files round-trip the action stream") {
  const auto actions = generate_actions(99, 60, fuzz_config());
  const std::string text = format_actions(actions);
  std::istringstream in(text);
  const auto parsed = parse_actions(in);
  REQUIRE(parsed.size() == actions.size());
  CHECK(format_actions(parsed) == text);
}

TEST_CASE("run_fuzz reports aggregate statistics and reproduces by seed") {
  FuzzOptions options;
  options.seed = 4242;
  options.sequences = 25;
  options.actions_per_sequence = 80;
  const auto a = run_fuzz(options);
  CHECK(!a.failure.has_value());
  CHECK(a.sequences_run == 25);
  CHECK(a.actions_run == 25 * 80);
  const auto b = run_fuzz(options);
  CHECK(b.total_samples == a.total_samples);
  CHECK(b.total_minor_collections == a.total_minor_collections);
}
