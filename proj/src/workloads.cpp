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

#include "gcprof/workloads.hpp"

#include <chrono>
#include <stdexcept>

namespace gcprof {

namespace {

/// Frame-scope guard for the shadow stack.
class ShadowFrame {
 public:
  ShadowFrame(ProfileRecorder& recorder, FrameId id) : recorder_(recorder) {
    recorder_.push_frame(id);
  }
  ~ShadowFrame() { recorder_.pop_frame(); }
  ShadowFrame(const ShadowFrame&) = delete;
  ShadowFrame& operator=(const ShadowFrame&) = delete;

 private:
  ProfileRecorder& recorder_;
};

// -- gcbench_like ------------------------------------------------------------
//
// Binary-tree build/discard churn with one long-lived tree per round: nodes
// with two reference fields and two scalar fields, built both top-down and
// bottom-up. Children are rooted only until their parent holds them.

struct GcBench {
  Heap& heap;
  ProfileRecorder& recorder;
  TypeId node_type;
  FrameId make_tree_frame;
  FrameId populate_frame;
  std::uint64_t node_bytes;
  WorkloadResult result;

  Address alloc_node() {
    // left, right, scalar payload
    const Address node = heap.alloc(node_bytes, node_type);
    result.objects_allocated += 1;
    return node;
  }

  // Bottom-up: builds children first, links them into a fresh parent.
  Address make_tree(std::uint32_t depth) {
    ShadowFrame frame(recorder, make_tree_frame);
    if (depth == 0) {
      const Address leaf = alloc_node();
      heap.write_field(leaf, 2, FieldValue::scalar(1));
      return leaf;
    }
    const Address left = make_tree(depth - 1);
    const RootSlot left_slot = heap.add_root(left);
    const Address right = make_tree(depth - 1);
    const RootSlot right_slot = heap.add_root(right);
    const Address node = alloc_node();
    heap.write_field(node, 0, FieldValue::ref(heap.root(left_slot)));
    heap.write_field(node, 1, FieldValue::ref(heap.root(right_slot)));
    heap.write_field(node, 2, FieldValue::scalar(depth));
    heap.remove_root(right_slot);
    heap.remove_root(left_slot);
    return node;
  }

  // Top-down: builds the parent first, then grows children under it. The
  // parent stays rooted across the recursion; children are re-read from its
  // fields because a collection during the left subtree can move the right
  // child.
  void populate(Address node_addr, std::uint32_t depth) {
    ShadowFrame frame(recorder, populate_frame);
    if (depth == 0) return;
    RootSlot node_slot = heap.add_root(node_addr);
    const Address left = alloc_node();
    heap.write_field(heap.root(node_slot), 0, FieldValue::ref(left));
    const Address right = alloc_node();
    heap.write_field(heap.root(node_slot), 1, FieldValue::ref(right));
    populate(heap.read_field(heap.root(node_slot), 0).as_ref(), depth - 1);
    populate(heap.read_field(heap.root(node_slot), 1).as_ref(), depth - 1);
    heap.remove_root(node_slot);
  }

  std::uint64_t count_nodes(Address node) {
    if (node == 0) return 0;
    std::uint64_t n = 1;
    const FieldValue left = heap.read_field(node, 0);
    const FieldValue right = heap.read_field(node, 1);
    if (left.is_ref() && !left.is_null()) n += count_nodes(left.as_ref());
    if (right.is_ref() && !right.is_null()) n += count_nodes(right.as_ref());
    return n;
  }
};

WorkloadResult run_gcbench(Heap& heap, ProfileRecorder& recorder,
                           const WorkloadParams& params) {
  GcBench bench{heap,
                recorder,
                recorder.types().intern("Node"),
                recorder.frames().intern("make_tree"),
                recorder.frames().intern("populate"),
                std::max<std::uint64_t>(params.node_payload_bytes, 24),
                {}};
  ShadowFrame top(recorder, recorder.frames().intern("gcbench"));

  for (std::uint32_t round = 0; round < params.rounds; ++round) {
    // Stretch tree: allocated and immediately dropped.
    bench.make_tree(params.tree_depth);

    // Long-lived tree survives the whole round.
    const RootSlot long_lived = heap.add_root(bench.make_tree(params.tree_depth - 1));

    for (std::uint32_t depth = 4; depth <= params.tree_depth; depth += 2) {
      const std::uint32_t iterations = 1u << (params.tree_depth - depth + 2);
      for (std::uint32_t i = 0; i < iterations; ++i) {
        bench.make_tree(depth);
        const Address top_node = bench.alloc_node();
        const RootSlot top_slot = heap.add_root(top_node);
        bench.populate(heap.root(top_slot), depth);
        heap.remove_root(top_slot);
      }
    }
    bench.result.checksum += bench.count_nodes(heap.root(long_lived));
    heap.remove_root(long_lived);
  }
  bench.result.bytes_allocated = heap.bytes_allocated_total();
  return bench.result;
}

// -- alloc_loop ----------------------------------------------------------------
//
// Tight allocation microbenchmark: fixed-size short-lived objects, none
// rooted. The default payload gives a 64-byte charge, which divides any
// power-of-two nursery.

WorkloadResult run_alloc_loop(Heap& heap, ProfileRecorder& recorder,
                              const WorkloadParams& params) {
  WorkloadResult result;
  const TypeId type = recorder.types().intern("LoopObject");
  ShadowFrame top(recorder, recorder.frames().intern("alloc_loop"));
  const std::uint32_t last_word = static_cast<std::uint32_t>(
      payload_words_for(params.object_payload_bytes) - 1);
  for (std::uint64_t i = 0; i < params.iterations; ++i) {
    const Address obj = heap.allocate(params.object_payload_bytes, type);
    heap.write_field(obj, last_word, FieldValue::scalar(i));
    result.checksum += heap.read_field(obj, last_word).as_scalar();
    result.objects_allocated += 1;
  }
  result.bytes_allocated = heap.bytes_allocated_total();
  return result;
}

// -- string_churn --------------------------------------------------------------
//
// Mixed small/large string allocation with a rotating window of live roots;
// every 16th string exceeds the large-object threshold.

WorkloadResult run_string_churn(Heap& heap, ProfileRecorder& recorder,
                                const WorkloadParams& params) {
  WorkloadResult result;
  const TypeId type = recorder.types().intern("String");
  ShadowFrame top(recorder, recorder.frames().intern("string_churn"));
  const FrameId small_frame = recorder.frames().intern("churn_small");
  const FrameId large_frame = recorder.frames().intern("churn_large");

  std::vector<RootSlot> window;
  window.reserve(params.live_window);
  std::uint64_t rng = params.churn_seed == 0 ? 1 : params.churn_seed;
  const std::uint64_t threshold = heap.config().large_object_threshold;

  for (std::uint64_t i = 0; i < params.churn_iterations; ++i) {
    rng = rng * 6364136223846793005ull + 1442695040888963407ull;
    Address str;
    if (i % 16 == 15) {
      ShadowFrame frame(recorder, large_frame);
      str = heap.alloc(threshold + (rng >> 33) % threshold, type);
    } else {
      ShadowFrame frame(recorder, small_frame);
      str = heap.alloc(16 + (rng >> 40) % 240, type);
    }
    result.objects_allocated += 1;
    heap.write_field(str, 0, FieldValue::scalar(i));

    if (window.size() < params.live_window) {
      window.push_back(heap.add_root(str));
    } else {
      const std::size_t victim = i % params.live_window;
      result.checksum +=
          heap.read_field(heap.root(window[victim]), 0).as_scalar();
      heap.remove_root(window[victim]);
      window[victim] = heap.add_root(str);
    }
  }
  result.bytes_allocated = heap.bytes_allocated_total();
  return result;
}

}  // namespace

std::vector<std::string> workload_names() {
  return {"gcbench_like", "alloc_loop", "string_churn"};
}

bool is_workload(const std::string& name) {
  for (const auto& n : workload_names())
    if (n == name) return true;
  return false;
}

WorkloadResult run_workload_body(const std::string& name, Heap& heap,
                                 ProfileRecorder& recorder,
                                 const WorkloadParams& params) {
  if (name == "gcbench_like") return run_gcbench(heap, recorder, params);
  if (name == "alloc_loop") return run_alloc_loop(heap, recorder, params);
  if (name == "string_churn") return run_string_churn(heap, recorder, params);
  throw std::invalid_argument("unknown workload: " + name);
}

RunResult run_workload(const std::string& name, const WorkloadParams& params,
                       const HeapConfig& config, std::uint64_t period_bytes,
                       Clock& clock, Profile* profile_out,
                       bool deterministic_rss) {
  ProfileRecorder recorder(clock);
  Heap heap(config, &recorder);
  if (deterministic_rss)
    recorder.set_rss_provider([&heap] { return heap.arena_reserved_bytes(); });
  if (period_bytes > 0) heap.enable_sampling(period_bytes);

  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.workload = run_workload_body(name, heap, recorder, params);
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result.samples = heap.samples_taken();
  result.minor_collections = heap.minor_collection_count();
  if (profile_out != nullptr) *profile_out = recorder.finalize();
  return result;
}

}  // namespace gcprof
