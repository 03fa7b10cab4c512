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

#include "gcprof/fuzz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "gcprof/clock.hpp"

namespace gcprof::fuzz {

// ---------------------------------------------------------------------------
// Reference sampler and oracle

std::pair<std::uint32_t, std::uint64_t> reference_sampler_step(
    std::uint64_t allocated_so_far, std::uint64_t size, std::uint64_t period) {
  GCPROF_CHECK(period > 0);
  // Deliberately the slow, obvious formulation: accumulate, then count
  // whole periods crossed. Strict-greater: landing exactly on a period
  // boundary does not fire.
  std::uint64_t allocated = allocated_so_far + size;
  std::uint32_t samples = 0;
  while (allocated > period) {
    ++samples;
    allocated -= period;
  }
  return {samples, allocated};
}

namespace {

// The oracle's own copy of the size arithmetic, kept independent of the
// heap implementation: header + payload rounded to words, large objects
// additionally rounded to page_round.
std::uint64_t oracle_words(std::uint64_t payload_bytes) {
  return payload_bytes <= 8 ? 1 : (payload_bytes + 7) / 8;
}

std::uint64_t oracle_charge(std::uint64_t payload_bytes, std::uint64_t threshold,
                            std::uint64_t page_round) {
  const std::uint64_t charge = 8 + oracle_words(payload_bytes) * 8;
  if (charge > threshold)
    return (charge + page_round - 1) / page_round * page_round;
  return charge;
}

std::uint64_t action_payload_bytes(const Action& action) {
  if (const auto* a = std::get_if<AllocObject>(&action)) return a->payload_bytes;
  if (const auto* a = std::get_if<AllocArray>(&action))
    return a->length_words * 8;
  if (const auto* a = std::get_if<AllocString>(&action)) return a->length_bytes;
  return 0;
}

bool is_allocation(const Action& action) {
  return std::holds_alternative<AllocObject>(action) ||
         std::holds_alternative<AllocArray>(action) ||
         std::holds_alternative<AllocString>(action);
}

}  // namespace

OracleReplay::OracleReplay(const HeapConfig& config) {
  const HeapConfig cfg = config.finalized();
  threshold_ = cfg.large_object_threshold;
  page_round_ = cfg.page_round;
}

std::uint64_t OracleReplay::charged_bytes(const Action& action) const {
  if (!is_allocation(action)) return 0;
  return oracle_charge(action_payload_bytes(action), threshold_, page_round_);
}

std::uint32_t OracleReplay::on_action(const Action& action) {
  if (const auto* e = std::get_if<EnableSampling>(&action)) {
    enabled_ = true;
    period_ = e->period;
    allocated_ = 0;  // re-enabling resets the countdown
    return 0;
  }
  if (std::holds_alternative<DisableSampling>(action)) {
    enabled_ = false;
    return 0;
  }
  if (!enabled_ || !is_allocation(action)) return 0;
  auto [samples, residual] =
      reference_sampler_step(allocated_, charged_bytes(action), period_);
  allocated_ = residual;
  return samples;
}

OraclePrediction predict_samples(std::span<const Action> actions,
                                 const HeapConfig& config) {
  OracleReplay oracle(config);
  OraclePrediction prediction;
  prediction.per_action_samples.reserve(actions.size());
  for (const Action& action : actions) {
    const std::uint32_t k = oracle.on_action(action);
    prediction.per_action_samples.push_back(k);
    prediction.total_samples += k;
  }
  return prediction;
}

// ---------------------------------------------------------------------------
// Differential executor

namespace {

struct ModelObject {
  RootSlot slot = 0;
  bool alive = false;
  Address last_addr = 0;
  std::uint64_t canary = 0;
  std::uint32_t payload_words = 0;
  TypeId type = 0;
};

struct Executor {
  Executor(const HeapConfig& config, const GcDebugHooks& hooks)
      : cfg(config.finalized()),
        recorder(clock),
        heap(cfg, &recorder),
        oracle(cfg) {
    heap.debug_hooks() = hooks;
    recorder.set_rss_provider([this] { return heap.arena_reserved_bytes(); });
    type_object = recorder.types().intern("Object");
    type_array = recorder.types().intern("Array");
    type_string = recorder.types().intern("String");
    recorder.push_frame("fuzz");
  }

  HeapConfig cfg;
  ManualClock clock;
  ProfileRecorder recorder;
  Heap heap;
  OracleReplay oracle;
  std::unordered_map<std::uint32_t, ModelObject> objects;
  std::unordered_map<std::uint64_t, std::uint32_t> sample_owner;
  std::size_t record_cursor = 0;
  std::uint64_t next_canary = 0x51ed2700;
  TypeId type_object = 0, type_array = 0, type_string = 0;
  SequenceResult result;

  std::optional<std::string> run_action(const Action& action);
  std::optional<std::string> check_invariants(std::uint32_t expected_samples,
                                              std::uint64_t samples_before);
  std::optional<std::string> check_new_resolutions();
  void register_samples(std::uint32_t id, std::uint64_t first,
                        std::uint64_t count);
  std::optional<std::string> do_alloc(std::uint32_t id, std::uint64_t payload,
                                      TypeId type);
  std::optional<std::string> do_access(std::uint32_t id);
};

void Executor::register_samples(std::uint32_t id, std::uint64_t first,
                                std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) sample_owner[first + i] = id;
}

std::optional<std::string> Executor::do_alloc(std::uint32_t id,
                                              std::uint64_t payload,
                                              TypeId type) {
  if (objects.contains(id)) return std::nullopt;  // shrunk duplicate: no-op
  const Address addr = heap.alloc(payload, type);
  ModelObject m;
  m.slot = heap.add_root(addr);
  m.alive = true;
  m.last_addr = addr;
  m.payload_words = heap.payload_word_count(addr);
  m.type = type;
  m.canary = next_canary++;
  heap.write_field(addr, m.payload_words - 1, FieldValue::scalar(m.canary));
  objects.emplace(id, m);
  return std::nullopt;
}

std::optional<std::string> Executor::do_access(std::uint32_t id) {
  auto it = objects.find(id);
  if (it == objects.end()) return std::nullopt;
  ModelObject& m = it->second;
  if (m.alive) {
    const Address addr = heap.root(m.slot);
    if (!heap.debug_is_live_object(addr))
      return "use-after-free: live object at invalid address";
    const FieldValue v = heap.read_field(addr, m.payload_words - 1);
    if (!v.is_scalar() || v.as_scalar() != m.canary)
      return "use-after-free: canary clobbered on live object";
    m.canary = next_canary++;
    heap.write_field(addr, m.payload_words - 1, FieldValue::scalar(m.canary));
    m.last_addr = addr;
    return std::nullopt;
  }
  // Stale handle: the object was dropped from the roots. Once a collection
  // has reclaimed it the access must be detected, never satisfied.
  if (!heap.debug_is_live_object(m.last_addr)) {
    ++result.uaf_detected;
  }
  return std::nullopt;
}

std::optional<std::string> Executor::run_action(const Action& action) {
  if (const auto* a = std::get_if<AllocObject>(&action))
    return do_alloc(a->id, a->payload_bytes, type_object);
  if (const auto* a = std::get_if<AllocArray>(&action))
    return do_alloc(a->id, a->length_words * 8, type_array);
  if (const auto* a = std::get_if<AllocString>(&action))
    return do_alloc(a->id, a->length_bytes, type_string);
  if (const auto* a = std::get_if<DropRoot>(&action)) {
    auto it = objects.find(a->id);
    if (it == objects.end() || !it->second.alive) return std::nullopt;
    it->second.last_addr = heap.root(it->second.slot);
    heap.remove_root(it->second.slot);
    it->second.alive = false;
    return std::nullopt;
  }
  if (const auto* a = std::get_if<AccessObject>(&action))
    return do_access(a->id);
  if (std::holds_alternative<ForceMinorCollection>(action)) {
    heap.minor_collection();
    ++result.forced_collections;
    return std::nullopt;
  }
  if (const auto* a = std::get_if<EnableSampling>(&action)) {
    heap.enable_sampling(a->period);
    return std::nullopt;
  }
  if (std::holds_alternative<DisableSampling>(action)) {
    heap.disable_sampling();
    return std::nullopt;
  }
  return "unhandled action";
}

std::optional<std::string> Executor::check_invariants(
    std::uint32_t expected_samples, std::uint64_t samples_before) {
  const NurserySnapshot ns = heap.nursery_state();
  std::ostringstream msg;

  if (!(ns.start <= ns.free && ns.free <= ns.top && ns.limit <= ns.top)) {
    msg << "cursor-sanity: start=" << ns.start << " free=" << ns.free
        << " top=" << ns.top << " limit=" << ns.limit;
    return msg.str();
  }
  if (ns.sampling_enabled != oracle.enabled()) {
    return std::string("limit-law: enable state diverged from the replay");
  }
  if (ns.sampling_enabled) {
    if (ns.limit != std::min(ns.sample_point, ns.top)) {
      msg << "limit-law: limit=" << ns.limit << " min(sample_point,top)="
          << std::min(ns.sample_point, ns.top);
      return msg.str();
    }
    const std::int64_t expected_countdown =
        static_cast<std::int64_t>(oracle.period()) -
        static_cast<std::int64_t>(oracle.allocated_since_sample());
    if (ns.sample_point - ns.free != expected_countdown) {
      msg << "countdown-invariant: sample_point-free="
          << (ns.sample_point - ns.free) << " expected " << expected_countdown;
      return msg.str();
    }
  } else if (ns.limit != ns.top) {
    msg << "limit-law: disabled but limit=" << ns.limit << " top=" << ns.top;
    return msg.str();
  }

  const std::uint64_t got = heap.samples_taken() - samples_before;
  if (got != expected_samples) {
    msg << "sample-count: action fired " << got << " samples, oracle expected "
        << expected_samples;
    return msg.str();
  }
  return std::nullopt;
}

std::optional<std::string> Executor::check_new_resolutions() {
  const auto& records = recorder.profile().records;
  for (; record_cursor < records.size(); ++record_cursor) {
    const auto* r = std::get_if<ResolutionRecord>(&records[record_cursor]);
    if (r == nullptr) continue;
    auto owner = sample_owner.find(r->sample_index);
    if (owner == sample_owner.end())
      return "survival-resolution: resolution for unknown sample";
    auto it = objects.find(owner->second);
    if (it == objects.end())
      return "survival-resolution: resolution for unknown object";
    const ModelObject& m = it->second;
    const Survival expected =
        m.alive ? Survival::kTenured : Survival::kDiedYoung;
    if (r->survived != expected) {
      std::ostringstream msg;
      msg << "survival-resolution: sample " << r->sample_index << " marked "
          << static_cast<int>(r->survived) << ", reachability says "
          << static_cast<int>(expected);
      return msg.str();
    }
    if (r->type_id != m.type)
      return "survival-resolution: wrong type id";
  }
  return std::nullopt;
}

}  // namespace

SequenceResult execute_and_check(std::span<const Action> actions,
                                 const HeapConfig& config,
                                 const GcDebugHooks& hooks) {
  Executor exec(config, hooks);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::uint64_t samples_before = exec.heap.samples_taken();
    const std::uint32_t expected = exec.oracle.on_action(actions[i]);
    std::optional<std::string> problem;
    try {
      problem = exec.run_action(actions[i]);
      if (!problem) problem = exec.check_invariants(expected, samples_before);
      if (!problem) problem = exec.check_new_resolutions();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    exec.result.samples = exec.heap.samples_taken();
    exec.result.minor_collections = exec.heap.minor_collection_count();
    if (problem) {
      std::string check = problem->substr(0, problem->find(':'));
      exec.result.failure = FuzzFailure{i, check, *problem};
      return exec.result;
    }
    if (is_allocation(actions[i])) {
      const std::uint64_t fired = exec.heap.samples_taken() - samples_before;
      if (fired > 0) {
        std::uint32_t id = 0;
        if (const auto* a = std::get_if<AllocObject>(&actions[i])) id = a->id;
        if (const auto* a = std::get_if<AllocArray>(&actions[i])) id = a->id;
        if (const auto* a = std::get_if<AllocString>(&actions[i])) id = a->id;
        exec.register_samples(id, samples_before, fired);
      }
      if (exec.oracle.charged_bytes(actions[i]) >
          exec.cfg.large_object_threshold)
        ++exec.result.large_allocations;
    }
  }
  return exec.result;
}

// ---------------------------------------------------------------------------
// Generation and shrinking

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t log_uniform(std::mt19937_64& rng, std::uint64_t lo,
                          std::uint64_t hi) {
  std::uniform_real_distribution<double> dist(std::log(static_cast<double>(lo)),
                                              std::log(static_cast<double>(hi)));
  const double v = std::exp(dist(rng));
  return std::clamp(static_cast<std::uint64_t>(v), lo, hi);
}

}  // namespace

std::vector<Action> generate_actions(std::uint64_t seed, std::size_t count,
                                     const HeapConfig& config) {
  const HeapConfig cfg = config.finalized();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> roll(0.0, 1.0);
  std::vector<Action> actions;
  actions.reserve(count);
  std::vector<std::uint32_t> live;
  std::uint32_t next_id = 0;

  const std::uint64_t threshold = cfg.large_object_threshold;
  auto small_alloc = [&]() -> Action {
    const std::uint64_t payload = log_uniform(rng, 1, threshold - 8);
    const std::uint32_t id = next_id++;
    live.push_back(id);
    switch (rng() % 3) {
      case 0: {
        const std::uint32_t words =
            static_cast<std::uint32_t>(payload_words_for(payload));
        const std::uint32_t refs = words > 1 ? rng() % std::min(words, 4u) : 0;
        return AllocObject{id, payload, refs};
      }
      case 1:
        return AllocArray{id, payload_words_for(payload)};
      default:
        return AllocString{id, payload};
    }
  };

  for (std::size_t i = 0; i < count; ++i) {
    const double r = roll(rng);
    if (r < 0.02) {
      actions.push_back(EnableSampling{log_uniform(rng, 64, 4 * cfg.nursery_size)});
    } else if (r < 0.04) {
      actions.push_back(DisableSampling{});
    } else if (r < 0.07) {
      actions.push_back(ForceMinorCollection{});
    } else if (r < 0.12) {
      const std::uint64_t payload = log_uniform(rng, threshold, 4 * threshold);
      const std::uint32_t id = next_id++;
      live.push_back(id);
      actions.push_back(AllocString{id, payload});
    } else if (r < 0.27 && !live.empty()) {
      const std::size_t pick = rng() % live.size();
      actions.push_back(DropRoot{live[pick]});
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
    } else if (r < 0.42 && !live.empty()) {
      actions.push_back(AccessObject{live[rng() % live.size()]});
    } else {
      actions.push_back(small_alloc());
    }
  }
  return actions;
}

std::vector<Action> shrink(std::vector<Action> failing, const HeapConfig& config,
                           const GcDebugHooks& hooks) {
  auto failure_of = [&](std::span<const Action> actions) {
    return execute_and_check(actions, config, hooks).failure;
  };
  auto initial = failure_of(failing);
  if (!initial) return failing;
  failing.resize(initial->action_index + 1);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < failing.size();) {
      std::vector<Action> candidate = failing;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
      if (auto f = failure_of(candidate)) {
        candidate.resize(f->action_index + 1);
        failing = std::move(candidate);
        changed = true;
      } else {
        ++i;
      }
    }
  }
  return failing;
}

FuzzOptions::FuzzOptions() {
  heap.nursery_size = 64 << 10;
  heap.major_collection_threshold = 256 << 10;
}

FuzzRunReport run_fuzz(const FuzzOptions& options, const GcDebugHooks& hooks) {
  FuzzRunReport report;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t state = options.seed;
  for (std::uint64_t i = 0; i < options.sequences; ++i) {
    const std::uint64_t seq_seed = splitmix64(state);
    auto actions = generate_actions(seq_seed, options.actions_per_sequence,
                                    options.heap);
    auto result = execute_and_check(actions, options.heap, hooks);
    ++report.sequences_run;
    report.actions_run += actions.size();
    report.total_samples += result.samples;
    report.total_minor_collections += result.minor_collections;
    report.total_large_allocations += result.large_allocations;
    report.total_forced_collections += result.forced_collections;
    if (result.samples > 0) ++report.sequences_with_sampling;
    if (result.failure) {
      report.failure = result.failure;
      report.failing_seed = seq_seed;
      report.failing_actions = options.shrink_failures
                                   ? shrink(std::move(actions), options.heap, hooks)
                                   : std::move(actions);
      break;
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// Replay files

namespace {

struct ActionFormatter {
  std::ostream& out;
  void operator()(const AllocObject& a) {
    out << "object " << a.id << ' ' << a.payload_bytes << ' ' << a.ref_fields;
  }
  void operator()(const AllocArray& a) {
    out << "array " << a.id << ' ' << a.length_words;
  }
  void operator()(const AllocString& a) {
    out << "string " << a.id << ' ' << a.length_bytes;
  }
  void operator()(const DropRoot& a) { out << "drop " << a.id; }
  void operator()(const AccessObject& a) { out << "access " << a.id; }
  void operator()(const ForceMinorCollection&) { out << "minor"; }
  void operator()(const EnableSampling& a) { out << "enable " << a.period; }
  void operator()(const DisableSampling&) { out << "disable"; }
};

}  // namespace

std::string format_actions(std::span<const Action> actions) {
  std::ostringstream out;
  for (const Action& action : actions) {
    std::visit(ActionFormatter{out}, action);
    out << '\n';
  }
  return out.str();
}

std::vector<Action> parse_actions(std::istream& in) {
  std::vector<Action> actions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    auto bad = [&]() -> std::runtime_error {
      return std::runtime_error("bad action at line " + std::to_string(line_no) +
                                ": " + line);
    };
    if (kind == "object") {
      AllocObject a;
      if (!(ls >> a.id >> a.payload_bytes >> a.ref_fields)) throw bad();
      actions.push_back(a);
    } else if (kind == "array") {
      AllocArray a;
      if (!(ls >> a.id >> a.length_words)) throw bad();
      actions.push_back(a);
    } else if (kind == "string") {
      AllocString a;
      if (!(ls >> a.id >> a.length_bytes)) throw bad();
      actions.push_back(a);
    } else if (kind == "drop") {
      DropRoot a;
      if (!(ls >> a.id)) throw bad();
      actions.push_back(a);
    } else if (kind == "access") {
      AccessObject a;
      if (!(ls >> a.id)) throw bad();
      actions.push_back(a);
    } else if (kind == "minor") {
      actions.push_back(ForceMinorCollection{});
    } else if (kind == "enable") {
      EnableSampling a;
      if (!(ls >> a.period)) throw bad();
      actions.push_back(a);
    } else if (kind == "disable") {
      actions.push_back(DisableSampling{});
    } else {
      throw bad();
    }
  }
  return actions;
}

}  // namespace gcprof::fuzz
