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

#ifndef GCPROF_PROFILE_IO_HPP
#define GCPROF_PROFILE_IO_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gcprof/profile.hpp"

namespace gcprof {

// GPRF binary profile stream, little-endian throughout:
//   magic "GPRF", version u16 = 1
//   records: tag u8, payload_length u32, payload
//     0x01 META:       sample_n_bytes u64, nursery_size u64, start_time_ns u64
//     0x02 SAMPLE:     sample_index u64, timestamp_ns u64, kind u8,
//                      alloc_size u64, n_frames u16, frame ids u32 x n
//     0x03 RESOLUTION: sample_index u64, type_id u16, survived u8
//     0x04 HEAP_STATS: timestamp_ns u64, arenas u64, used u64, rss u64,
//                      phase u8
//     0x05 GC_EVENT:   kind u8, phase u8, start_ns u64, end_ns u64
//     0x06 TYPE_MAP:   n u16, then (type_id u16, name_len u16, name) x n
//     0x07 FRAME_MAP:  n u32, then (frame_id u32, name_len u16, name) x n
// The name maps are written after the record stream and are omitted when
// they carry no information (no frames; no types beyond the reserved id 0).

inline constexpr char kProfileMagic[4] = {'G', 'P', 'R', 'F'};
inline constexpr std::uint16_t kProfileVersion = 1;

class ProfileParseError : public std::runtime_error {
 public:
  ProfileParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("profile parse error at byte " +
                           std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Serializes the profile; deterministic given identical record sequences.
/// Returns the number of bytes written. Stream failures throw.
std::size_t serialize_profile(const Profile& profile, std::ostream& sink);

std::vector<std::uint8_t> serialize_profile(const Profile& profile);

struct ParsedProfile {
  Profile profile;
  std::size_t unknown_record_count = 0;  // skipped with a warning count
};

ParsedProfile parse_profile(std::span<const std::uint8_t> bytes);

void write_profile_file(const Profile& profile, const std::string& path);
std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace gcprof

#endif  // GCPROF_PROFILE_IO_HPP
