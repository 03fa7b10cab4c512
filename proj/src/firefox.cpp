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

#include "gcprof/firefox.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "gcprof/profile_io.hpp"

namespace gcprof::firefox {

namespace {

using nlohmann::json;

/// Milliseconds with microsecond precision.
double ns_to_ms(std::uint64_t ns) {
  return static_cast<double>(ns / 1000) / 1000.0;
}

/// Builds the deduplicated string/func/frame/stack tables of a processed
/// profile thread. Identical (prefix, frame) pairs share a stackTable row,
/// which keeps converted profiles small.
class TableBuilder {
 public:
  std::uint32_t intern_string(const std::string& s) {
    auto it = string_ids_.find(s);
    if (it != string_ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(strings_.size());
    strings_.push_back(s);
    string_ids_.emplace(s, id);
    return id;
  }

  std::uint32_t func_for(const std::string& name) {
    std::uint32_t str = intern_string(name);
    auto it = func_ids_.find(str);
    if (it != func_ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(func_names_.size());
    func_names_.push_back(str);
    func_ids_.emplace(str, id);
    return id;
  }

  std::uint32_t frame_for(std::uint32_t func, int category) {
    const std::uint64_t key = (static_cast<std::uint64_t>(func) << 8) |
                              static_cast<std::uint64_t>(category);
    auto it = frame_ids_.find(key);
    if (it != frame_ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(frame_funcs_.size());
    frame_funcs_.push_back(func);
    frame_categories_.push_back(category);
    frame_ids_.emplace(key, id);
    return id;
  }

  // prefix -1 encodes a root stack node.
  std::int32_t stack_for(std::int32_t prefix, std::uint32_t frame) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(prefix)) << 32) |
        frame;
    auto it = stack_ids_.find(key);
    if (it != stack_ids_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(stack_prefixes_.size());
    stack_prefixes_.push_back(prefix);
    stack_frames_.push_back(frame);
    stack_ids_.emplace(key, id);
    return id;
  }

  json string_array() const { return json(strings_); }

  json func_table() const {
    json t;
    t["name"] = func_names_;
    json is_js = json::array();
    json relevant = json::array();
    json resource = json::array();
    json file_name = json::array();
    for (std::size_t i = 0; i < func_names_.size(); ++i) {
      is_js.push_back(false);
      relevant.push_back(false);
      resource.push_back(-1);
      file_name.push_back(nullptr);
    }
    t["isJS"] = is_js;
    t["relevantForJS"] = relevant;
    t["resource"] = resource;
    t["fileName"] = file_name;
    t["lineNumber"] = json::array();
    t["columnNumber"] = json::array();
    for (std::size_t i = 0; i < func_names_.size(); ++i) {
      t["lineNumber"].push_back(nullptr);
      t["columnNumber"].push_back(nullptr);
    }
    t["length"] = func_names_.size();
    return t;
  }

  json frame_table() const {
    json t;
    t["func"] = frame_funcs_;
    t["category"] = frame_categories_;
    json fill = json::array();
    json subcat = json::array();
    json line = json::array();
    for (std::size_t i = 0; i < frame_funcs_.size(); ++i) {
      fill.push_back(nullptr);
      subcat.push_back(0);
      line.push_back(nullptr);
    }
    t["address"] = fill;
    t["inlineDepth"] = json::array();
    for (std::size_t i = 0; i < frame_funcs_.size(); ++i)
      t["inlineDepth"].push_back(0);
    t["subcategory"] = subcat;
    t["nativeSymbol"] = fill;
    t["innerWindowID"] = fill;
    t["implementation"] = fill;
    t["line"] = line;
    t["column"] = line;
    t["length"] = frame_funcs_.size();
    return t;
  }

  json stack_table() const {
    json t;
    json prefixes = json::array();
    for (std::int32_t p : stack_prefixes_) {
      if (p < 0)
        prefixes.push_back(nullptr);
      else
        prefixes.push_back(p);
    }
    t["prefix"] = prefixes;
    t["frame"] = stack_frames_;
    json cats = json::array();
    json subcats = json::array();
    for (std::size_t i = 0; i < stack_frames_.size(); ++i) {
      cats.push_back(frame_categories_[stack_frames_[i]]);
      subcats.push_back(0);
    }
    t["category"] = cats;
    t["subcategory"] = subcats;
    t["length"] = stack_frames_.size();
    return t;
  }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::uint32_t> string_ids_;
  std::vector<std::uint32_t> func_names_;
  std::unordered_map<std::uint32_t, std::uint32_t> func_ids_;
  std::vector<std::uint32_t> frame_funcs_;
  std::vector<int> frame_categories_;
  std::unordered_map<std::uint64_t, std::uint32_t> frame_ids_;
  std::vector<std::int32_t> stack_prefixes_;
  std::vector<std::uint32_t> stack_frames_;
  std::unordered_map<std::uint64_t, std::int32_t> stack_ids_;
};

json categories() {
  json cats = json::array();
  auto cat = [](const char* name, const char* color) {
    json c;
    c["name"] = name;
    c["color"] = color;
    c["subcategories"] = json::array({"Other"});
    return c;
  };
  cats.push_back(cat("Other", "grey"));
  cats.push_back(cat("collected", "green"));
  cats.push_back(cat("tenured", "red"));
  cats.push_back(cat("unresolved", "yellow"));
  return cats;
}

json counter(const std::string& description, std::uint64_t pid,
             const std::vector<double>& times,
             const std::vector<std::int64_t>& deltas) {
  json c;
  // The viewer identifies memory tracks by the fixed name "Memory"; the
  // description is the only place the specific statistic can be named.
  c["name"] = "Memory";
  c["category"] = "Memory";
  c["description"] = description;
  c["pid"] = std::to_string(pid);
  c["mainThreadIndex"] = 0;
  json samples;
  samples["time"] = times;
  samples["count"] = deltas;
  samples["length"] = times.size();
  c["samples"] = samples;
  return c;
}

std::string frame_name_for(const Profile& p, FrameId id) {
  if (id < p.frame_names.size() && !p.frame_names[id].empty())
    return p.frame_names[id];
  return "frame" + std::to_string(id);
}

std::string type_name_for(const Profile& p, TypeId id) {
  if (id < p.type_names.size() && !p.type_names[id].empty())
    return p.type_names[id];
  return "type" + std::to_string(id);
}

}  // namespace

json convert(std::span<const std::uint8_t> gprf_bytes, ConvertStats* stats) {
  const ParsedProfile parsed = parse_profile(gprf_bytes);
  const Profile& p = parsed.profile;

  // Resolutions are matched to samples up front; a sample without one keeps
  // the unresolved category rather than being dropped.
  std::unordered_map<std::uint64_t, ResolutionRecord> resolutions;
  for (const auto& record : p.records) {
    if (const auto* r = std::get_if<ResolutionRecord>(&record))
      resolutions.emplace(r->sample_index, *r);
  }

  TableBuilder tables;
  json sample_stacks = json::array();
  json sample_times = json::array();
  json sample_weights = json::array();

  json marker_names = json::array();
  json marker_starts = json::array();
  json marker_ends = json::array();
  json marker_phases = json::array();
  json marker_cats = json::array();
  json marker_data = json::array();

  std::vector<double> stat_times;
  std::vector<std::int64_t> arena_deltas, used_deltas, rss_deltas;
  std::int64_t prev_arenas = 0, prev_used = 0, prev_rss = 0;

  for (const auto& record : p.records) {
    if (const auto* s = std::get_if<SampleRecord>(&record)) {
      int category = kCategoryUnresolved;
      std::string type_name = "unknown";
      if (auto it = resolutions.find(s->sample_index); it != resolutions.end()) {
        switch (it->second.survived) {
          case Survival::kDiedYoung:
            category = kCategoryCollected;
            break;
          case Survival::kTenured:
            category = kCategoryTenured;
            break;
          case Survival::kUnknown:
            category = kCategoryUnresolved;
            break;
        }
        type_name = type_name_for(p, it->second.type_id);
      }
      std::int32_t stack = -1;
      for (FrameId f : s->stack) {
        const std::uint32_t func = tables.func_for(frame_name_for(p, f));
        stack = tables.stack_for(stack, tables.frame_for(func, kCategoryOther));
      }
      // Synthetic leaf frame: the resolved type of the sampled object sits
      // on top of the captured stack, colored by its survival.
      const std::uint32_t type_func = tables.func_for(type_name);
      stack = tables.stack_for(stack, tables.frame_for(type_func, category));
      sample_stacks.push_back(stack);
      sample_times.push_back(ns_to_ms(s->timestamp_ns));
      sample_weights.push_back(s->alloc_size);
    } else if (const auto* e = std::get_if<GcEventRecord>(&record)) {
      std::string name = e->kind == GcEventKind::kMinor
                             ? "Minor GC"
                             : std::string("Major GC ") + gc_phase_name(e->phase);
      marker_names.push_back(tables.intern_string(name));
      marker_starts.push_back(ns_to_ms(e->start_ns));
      marker_ends.push_back(ns_to_ms(e->end_ns));
      marker_phases.push_back(1);  // interval marker
      marker_cats.push_back(kCategoryOther);
      marker_data.push_back(nullptr);
    } else if (const auto* h = std::get_if<HeapStatsRecord>(&record)) {
      const double t = ns_to_ms(h->timestamp_ns);
      stat_times.push_back(t);
      // Counter samples carry deltas; the viewer accumulates them.
      arena_deltas.push_back(static_cast<std::int64_t>(h->total_size_of_arenas) - prev_arenas);
      used_deltas.push_back(static_cast<std::int64_t>(h->total_memory_used) - prev_used);
      rss_deltas.push_back(static_cast<std::int64_t>(h->rss) - prev_rss);
      prev_arenas = static_cast<std::int64_t>(h->total_size_of_arenas);
      prev_used = static_cast<std::int64_t>(h->total_memory_used);
      prev_rss = static_cast<std::int64_t>(h->rss);
    }
  }

  json thread;
  thread["name"] = "GC Allocations";
  thread["isMainThread"] = true;
  thread["processType"] = "default";
  thread["processName"] = "gcprof";
  thread["pid"] = "1";
  thread["tid"] = "1";
  thread["registerTime"] = 0;
  thread["unregisterTime"] = nullptr;
  thread["processStartupTime"] = 0;
  thread["processShutdownTime"] = nullptr;
  thread["pausedRanges"] = json::array();

  json samples;
  samples["stack"] = sample_stacks;
  samples["time"] = sample_times;
  samples["weight"] = sample_weights;
  samples["weightType"] = "bytes";
  samples["length"] = sample_stacks.size();
  thread["samples"] = samples;

  json markers;
  markers["name"] = marker_names;
  markers["startTime"] = marker_starts;
  markers["endTime"] = marker_ends;
  markers["phase"] = marker_phases;
  markers["category"] = marker_cats;
  markers["data"] = marker_data;
  markers["length"] = marker_names.size();
  thread["markers"] = markers;

  thread["stackTable"] = tables.stack_table();
  thread["frameTable"] = tables.frame_table();
  thread["funcTable"] = tables.func_table();
  json resource_table;
  resource_table["length"] = 0;
  resource_table["lib"] = json::array();
  resource_table["name"] = json::array();
  resource_table["host"] = json::array();
  resource_table["type"] = json::array();
  thread["resourceTable"] = resource_table;
  json native_symbols;
  native_symbols["length"] = 0;
  native_symbols["libIndex"] = json::array();
  native_symbols["address"] = json::array();
  native_symbols["name"] = json::array();
  native_symbols["functionSize"] = json::array();
  thread["nativeSymbols"] = native_symbols;
  thread["stringArray"] = tables.string_array();

  json meta;
  meta["interval"] = 1;  // nominal; allocation samples are aperiodic
  meta["startTime"] = ns_to_ms(p.meta.start_time_ns);
  meta["processType"] = 0;
  meta["product"] = "gcprof";
  meta["stackwalk"] = 0;
  meta["version"] = 30;
  meta["preprocessedProfileVersion"] = 48;
  meta["categories"] = categories();
  meta["markerSchema"] = json::array();
  meta["symbolicated"] = true;
  meta["sampleUnits"] =
      json{{"time", "ms"}, {"eventDelay", "ms"}, {"threadCPUDelta", "µs"}};
  if (p.meta.sample_n_bytes != 0)
    meta["samplingPeriodBytes"] = p.meta.sample_n_bytes;
  meta["nurseryBytes"] = p.meta.nursery_size;

  json profile;
  profile["meta"] = meta;
  profile["libs"] = json::array();
  profile["threads"] = json::array({thread});
  profile["counters"] = json::array({
      counter("GC arena bytes reserved", 1, stat_times, arena_deltas),
      counter("GC arena bytes used", 1, stat_times, used_deltas),
      counter("process resident set size", 1, stat_times, rss_deltas),
  });
  profile["pausedRanges"] = json::array();

  if (stats) {
    stats->samples = sample_stacks.size();
    stats->markers = marker_names.size();
    stats->counter_points = stat_times.size();
    stats->unknown_records = parsed.unknown_record_count;
  }
  return profile;
}

namespace {

void check_index_array(const json& arr, std::size_t bound, bool nullable,
                       const std::string& what,
                       std::vector<std::string>& violations) {
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& v = arr[i];
    if (v.is_null()) {
      if (!nullable)
        violations.push_back(what + "[" + std::to_string(i) + "] is null");
      continue;
    }
    if (!v.is_number_integer() ||
        v.get<std::int64_t>() < 0 ||
        static_cast<std::size_t>(v.get<std::int64_t>()) >= bound) {
      violations.push_back(what + "[" + std::to_string(i) + "] = " + v.dump() +
                           " out of range (bound " + std::to_string(bound) + ")");
    }
  }
}

std::size_t table_length(const json& t, const char* name,
                         std::vector<std::string>& violations) {
  if (!t.contains("length") || !t["length"].is_number_unsigned()) {
    violations.push_back(std::string(name) + " missing length");
    return 0;
  }
  return t["length"].get<std::size_t>();
}

}  // namespace

std::vector<std::string> validate(const json& profile) {
  std::vector<std::string> violations;
  if (!profile.contains("threads") || !profile["threads"].is_array() ||
      profile["threads"].empty()) {
    violations.push_back("profile has no threads");
    return violations;
  }
  const std::size_t n_categories =
      profile.contains("meta") && profile["meta"].contains("categories")
          ? profile["meta"]["categories"].size()
          : 0;

  for (const auto& thread : profile["threads"]) {
    const auto& strings = thread["stringArray"];
    const auto& func_table = thread["funcTable"];
    const auto& frame_table = thread["frameTable"];
    const auto& stack_table = thread["stackTable"];
    const auto& samples = thread["samples"];
    const auto& markers = thread["markers"];

    const std::size_t n_strings = strings.size();
    const std::size_t n_funcs = table_length(func_table, "funcTable", violations);
    const std::size_t n_frames = table_length(frame_table, "frameTable", violations);
    const std::size_t n_stacks = table_length(stack_table, "stackTable", violations);
    const std::size_t n_samples = table_length(samples, "samples", violations);
    const std::size_t n_markers = table_length(markers, "markers", violations);

    if (func_table["name"].size() != n_funcs)
      violations.push_back("funcTable.name size != length");
    if (frame_table["func"].size() != n_frames)
      violations.push_back("frameTable.func size != length");
    if (stack_table["frame"].size() != n_stacks ||
        stack_table["prefix"].size() != n_stacks)
      violations.push_back("stackTable column size != length");
    if (samples["stack"].size() != n_samples ||
        samples["time"].size() != n_samples)
      violations.push_back("samples column size != length");

    check_index_array(func_table["name"], n_strings, false, "funcTable.name",
                      violations);
    check_index_array(frame_table["func"], n_funcs, false, "frameTable.func",
                      violations);
    check_index_array(frame_table["category"], n_categories, true,
                      "frameTable.category", violations);
    check_index_array(stack_table["frame"], n_frames, false, "stackTable.frame",
                      violations);
    check_index_array(stack_table["category"], n_categories, true,
                      "stackTable.category", violations);
    check_index_array(samples["stack"], n_stacks, true, "samples.stack",
                      violations);
    check_index_array(markers["name"], n_strings, false, "markers.name",
                      violations);

    // Every stack chains to a root through earlier entries only.
    const auto& prefixes = stack_table["prefix"];
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      const auto& pfx = prefixes[i];
      if (pfx.is_null()) continue;
      if (!pfx.is_number_integer() || pfx.get<std::int64_t>() < 0 ||
          pfx.get<std::uint64_t>() >= i) {
        violations.push_back("stackTable.prefix[" + std::to_string(i) +
                             "] does not chain to a root");
      }
    }

    for (std::size_t i = 0; i < n_markers; ++i) {
      if (markers["startTime"][i].is_number() &&
          markers["endTime"][i].is_number() &&
          markers["startTime"][i].get<double>() >
              markers["endTime"][i].get<double>())
        violations.push_back("markers[" + std::to_string(i) + "] start > end");
    }
  }

  if (profile.contains("counters")) {
    for (std::size_t c = 0; c < profile["counters"].size(); ++c) {
      const auto& samples = profile["counters"][c]["samples"];
      const std::size_t len = samples["length"].get<std::size_t>();
      if (samples["time"].size() != len || samples["count"].size() != len)
        violations.push_back("counters[" + std::to_string(c) +
                             "] column size != length");
    }
  }
  return violations;
}

}  // namespace gcprof::firefox
