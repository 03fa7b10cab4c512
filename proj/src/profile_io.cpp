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

#include "gcprof/profile_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace gcprof {

namespace {

constexpr std::uint8_t kTagMeta = 0x01;
constexpr std::uint8_t kTagSample = 0x02;
constexpr std::uint8_t kTagResolution = 0x03;
constexpr std::uint8_t kTagHeapStats = 0x04;
constexpr std::uint8_t kTagGcEvent = 0x05;
constexpr std::uint8_t kTagTypeMap = 0x06;
constexpr std::uint8_t kTagFrameMap = 0x07;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& data() const { return buf_; }
  void clear() { buf_.clear(); }

 private:
  std::vector<std::uint8_t> buf_;
};

void write_record(Writer& out, std::uint8_t tag, const Writer& payload) {
  out.u8(tag);
  out.u32(static_cast<std::uint32_t>(payload.data().size()));
  out.bytes(payload.data().data(), payload.data().size());
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return off_; }
  bool at_end() const { return off_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - off_; }

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() { return read_le<std::uint16_t>(); }
  std::uint32_t u32() { return read_le<std::uint32_t>(); }
  std::uint64_t u64() { return read_le<std::uint64_t>(); }
  std::string str(std::size_t n) {
    auto s = take(n);
    return std::string(reinterpret_cast<const char*>(s.data()), n);
  }
  void skip(std::size_t n) { take(n); }

 private:
  template <typename T>
  T read_le() {
    auto s = take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (remaining() < n)
      throw ProfileParseError(off_, "truncated stream (wanted " +
                                        std::to_string(n) + " bytes, have " +
                                        std::to_string(remaining()) + ")");
    auto s = bytes_.subspan(off_, n);
    off_ += n;
    return s;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t off_ = 0;
};

struct RecordSerializer {
  Writer payload;

  std::uint8_t operator()(const SampleRecord& r) {
    payload.u64(r.sample_index);
    payload.u64(r.timestamp_ns);
    payload.u8(static_cast<std::uint8_t>(r.kind));
    payload.u64(r.alloc_size);
    payload.u16(static_cast<std::uint16_t>(r.stack.size()));
    for (FrameId f : r.stack) payload.u32(f);
    return kTagSample;
  }
  std::uint8_t operator()(const ResolutionRecord& r) {
    payload.u64(r.sample_index);
    payload.u16(r.type_id);
    payload.u8(static_cast<std::uint8_t>(r.survived));
    return kTagResolution;
  }
  std::uint8_t operator()(const HeapStatsRecord& r) {
    payload.u64(r.timestamp_ns);
    payload.u64(r.total_size_of_arenas);
    payload.u64(r.total_memory_used);
    payload.u64(r.rss);
    payload.u8(static_cast<std::uint8_t>(r.gc_phase));
    return kTagHeapStats;
  }
  std::uint8_t operator()(const GcEventRecord& r) {
    payload.u8(static_cast<std::uint8_t>(r.kind));
    payload.u8(static_cast<std::uint8_t>(r.phase));
    payload.u64(r.start_ns);
    payload.u64(r.end_ns);
    return kTagGcEvent;
  }
};

GcPhase phase_from_u8(std::uint8_t v, std::size_t offset) {
  if (v > 4) throw ProfileParseError(offset, "bad gc phase value");
  return static_cast<GcPhase>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_profile(const Profile& profile) {
  Writer out;
  out.bytes(kProfileMagic, 4);
  out.u16(kProfileVersion);

  Writer meta;
  meta.u64(profile.meta.sample_n_bytes);
  meta.u64(profile.meta.nursery_size);
  meta.u64(profile.meta.start_time_ns);
  write_record(out, kTagMeta, meta);

  for (const auto& record : profile.records) {
    RecordSerializer ser;
    std::uint8_t tag = std::visit(ser, record);
    write_record(out, tag, ser.payload);
  }

  // Name maps go last so registries are complete; omitted when they carry
  // nothing beyond the reserved "unknown" type.
  if (profile.type_names.size() > 1) {
    Writer map;
    map.u16(static_cast<std::uint16_t>(profile.type_names.size()));
    for (std::size_t i = 0; i < profile.type_names.size(); ++i) {
      map.u16(static_cast<std::uint16_t>(i));
      map.u16(static_cast<std::uint16_t>(profile.type_names[i].size()));
      map.bytes(profile.type_names[i].data(), profile.type_names[i].size());
    }
    write_record(out, kTagTypeMap, map);
  }
  if (!profile.frame_names.empty()) {
    Writer map;
    map.u32(static_cast<std::uint32_t>(profile.frame_names.size()));
    for (std::size_t i = 0; i < profile.frame_names.size(); ++i) {
      map.u32(static_cast<std::uint32_t>(i));
      map.u16(static_cast<std::uint16_t>(profile.frame_names[i].size()));
      map.bytes(profile.frame_names[i].data(), profile.frame_names[i].size());
    }
    write_record(out, kTagFrameMap, map);
  }
  return out.data();
}

std::size_t serialize_profile(const Profile& profile, std::ostream& sink) {
  auto bytes = serialize_profile(profile);
  sink.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw std::runtime_error("profile sink write failed");
  return bytes.size();
}

ParsedProfile parse_profile(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  ParsedProfile result;
  Profile& p = result.profile;
  p.type_names = {"unknown"};

  if (in.remaining() < 6 || std::memcmp(bytes.data(), kProfileMagic, 4) != 0)
    throw ProfileParseError(0, "bad magic");
  in.skip(4);
  if (std::uint16_t v = in.u16(); v != kProfileVersion)
    throw ProfileParseError(4, "unsupported version " + std::to_string(v));

  bool saw_meta = false;
  while (!in.at_end()) {
    const std::size_t record_start = in.offset();
    const std::uint8_t tag = in.u8();
    const std::uint32_t len = in.u32();
    if (in.remaining() < len)
      throw ProfileParseError(record_start, "truncated record payload");
    const std::size_t payload_end = in.offset() + len;

    switch (tag) {
      case kTagMeta: {
        p.meta.sample_n_bytes = in.u64();
        p.meta.nursery_size = in.u64();
        p.meta.start_time_ns = in.u64();
        saw_meta = true;
        break;
      }
      case kTagSample: {
        SampleRecord r;
        r.sample_index = in.u64();
        r.timestamp_ns = in.u64();
        std::uint8_t kind = in.u8();
        if (kind > 1) throw ProfileParseError(record_start, "bad sample kind");
        r.kind = static_cast<SampleKind>(kind);
        r.alloc_size = in.u64();
        const std::uint16_t n = in.u16();
        r.stack.reserve(n);
        for (std::uint16_t i = 0; i < n; ++i) r.stack.push_back(in.u32());
        p.records.emplace_back(std::move(r));
        break;
      }
      case kTagResolution: {
        ResolutionRecord r;
        r.sample_index = in.u64();
        r.type_id = in.u16();
        std::uint8_t s = in.u8();
        if (s != 0 && s != 1 && s != 0xFF)
          throw ProfileParseError(record_start, "bad survival value");
        r.survived = static_cast<Survival>(s);
        p.records.emplace_back(r);
        break;
      }
      case kTagHeapStats: {
        HeapStatsRecord r;
        r.timestamp_ns = in.u64();
        r.total_size_of_arenas = in.u64();
        r.total_memory_used = in.u64();
        r.rss = in.u64();
        r.gc_phase = phase_from_u8(in.u8(), record_start);
        p.records.emplace_back(r);
        break;
      }
      case kTagGcEvent: {
        GcEventRecord r;
        std::uint8_t kind = in.u8();
        if (kind > 1) throw ProfileParseError(record_start, "bad event kind");
        r.kind = static_cast<GcEventKind>(kind);
        r.phase = phase_from_u8(in.u8(), record_start);
        r.start_ns = in.u64();
        r.end_ns = in.u64();
        p.records.emplace_back(r);
        break;
      }
      case kTagTypeMap: {
        const std::uint16_t n = in.u16();
        for (std::uint16_t i = 0; i < n; ++i) {
          const std::uint16_t id = in.u16();
          const std::uint16_t len16 = in.u16();
          std::string name = in.str(len16);
          if (id >= p.type_names.size()) p.type_names.resize(id + 1);
          p.type_names[id] = std::move(name);
        }
        break;
      }
      case kTagFrameMap: {
        const std::uint32_t n = in.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
          const std::uint32_t id = in.u32();
          const std::uint16_t len16 = in.u16();
          std::string name = in.str(len16);
          if (id >= p.frame_names.size()) p.frame_names.resize(id + 1);
          p.frame_names[id] = std::move(name);
        }
        break;
      }
      default:
        // Unknown tags are skippable by construction (length-prefixed).
        in.skip(len);
        ++result.unknown_record_count;
        break;
    }
    if (in.offset() != payload_end)
      throw ProfileParseError(record_start, "record payload length mismatch");
  }
  if (!saw_meta) throw ProfileParseError(6, "missing META record");
  return result;
}

void write_profile_file(const Profile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  serialize_profile(profile, out);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string& s = ss.str();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace gcprof
