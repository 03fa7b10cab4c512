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

#ifndef GCPROF_FIREFOX_HPP
#define GCPROF_FIREFOX_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gcprof::firefox {

struct ConvertStats {
  std::size_t samples = 0;
  std::size_t markers = 0;
  std::size_t counter_points = 0;
  std::size_t unknown_records = 0;
};

/// Converts a GPRF profile stream into the firefox-processed-profile JSON
/// layout (table-of-arrays) loadable by the Firefox Profiler viewer.
/// Allocation samples become thread samples whose leaf frame is a synthetic
/// type frame categorized by survival; heap statistics become "Memory"
/// counter tracks; GC events become markers. Pure function: identical input
/// bytes produce identical output.
nlohmann::json convert(std::span<const std::uint8_t> gprf_bytes,
                       ConvertStats* stats = nullptr);

/// Structural schema check over the converted document. Returns one message
/// per violated table-reference invariant; empty means the profile is
/// well-formed.
std::vector<std::string> validate(const nlohmann::json& profile);

// Category indices in the emitted category list.
inline constexpr int kCategoryOther = 0;
inline constexpr int kCategoryCollected = 1;
inline constexpr int kCategoryTenured = 2;
inline constexpr int kCategoryUnresolved = 3;

}  // namespace gcprof::firefox

#endif  // GCPROF_FIREFOX_HPP
