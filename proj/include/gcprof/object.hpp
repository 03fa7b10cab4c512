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

#ifndef GCPROF_OBJECT_HPP
#define GCPROF_OBJECT_HPP

#include <cstdint>

#include "gcprof/common.hpp"

namespace gcprof {

/// Addresses are raw byte addresses held as signed 64-bit integers so that
/// cursor arithmetic (in particular the virtual sample point, which may lie
/// beyond the end of the nursery or transiently below it) is exact signed
/// integer arithmetic with no clamping.
using Address = std::int64_t;

using TypeId = std::uint16_t;
using FrameId = std::uint32_t;

// GC flag bits stored in the second 16 bits of the header word.
inline constexpr std::uint16_t kFlagForwarded = 1u << 0;
inline constexpr std::uint16_t kFlagTenured = 1u << 1;
inline constexpr std::uint16_t kFlagMarked = 1u << 2;
inline constexpr std::uint16_t kFlagSampled = 1u << 3;
// Scratch bit used for transient reachability walks; never visible across
// public operations.
inline constexpr std::uint16_t kFlagScratch = 1u << 4;

/// Every heap object starts with one 8-byte header word:
///   bits  0..15  type id (index into the type registry, 0 = unknown)
///   bits 16..31  GC flags
///   bits 32..63  payload length in words
/// When kFlagForwarded is set, the first payload word holds the forwarding
/// address of the copy in the old space.
struct ObjectHeader {
  std::uint64_t word = 0;

  TypeId type_id() const { return static_cast<TypeId>(word & 0xFFFF); }
  std::uint16_t flags() const {
    return static_cast<std::uint16_t>((word >> 16) & 0xFFFF);
  }
  std::uint32_t size_words() const {
    return static_cast<std::uint32_t>(word >> 32);
  }
  void set_flags(std::uint16_t f) {
    word = (word & ~0xFFFF0000ull) | (static_cast<std::uint64_t>(f) << 16);
  }
  void or_flags(std::uint16_t f) {
    word |= static_cast<std::uint64_t>(f) << 16;
  }
  void clear_flags(std::uint16_t f) {
    word &= ~(static_cast<std::uint64_t>(f) << 16);
  }
  bool has_flags(std::uint16_t f) const { return (flags() & f) == f; }

  static std::uint64_t make(TypeId type, std::uint32_t size_words) {
    return static_cast<std::uint64_t>(type) |
           (static_cast<std::uint64_t>(size_words) << 32);
  }
};

static_assert(sizeof(ObjectHeader) == kHeaderBytes);

/// Payload words carry a one-bit tag: references are stored raw (objects are
/// word-aligned, so bit 0 is clear; 0 is the null reference) and scalars are
/// stored shifted left with bit 0 set. The collector identifies reference
/// fields by this tag alone.
class FieldValue {
 public:
  FieldValue() : raw_(0) {}

  static FieldValue ref(Address a) {
    GCPROF_CHECK((a & 7) == 0);
    FieldValue v;
    v.raw_ = static_cast<std::uint64_t>(a);
    return v;
  }
  static FieldValue scalar(std::uint64_t s) {
    FieldValue v;
    v.raw_ = (s << 1) | 1;
    return v;
  }
  static FieldValue from_raw(std::uint64_t w) {
    FieldValue v;
    v.raw_ = w;
    return v;
  }

  bool is_scalar() const { return (raw_ & 1) != 0; }
  bool is_ref() const { return !is_scalar(); }
  bool is_null() const { return raw_ == 0; }
  Address as_ref() const {
    GCPROF_CHECK(is_ref());
    return static_cast<Address>(raw_);
  }
  std::uint64_t as_scalar() const {
    GCPROF_CHECK(is_scalar());
    return raw_ >> 1;
  }
  std::uint64_t raw() const { return raw_; }

  bool operator==(const FieldValue&) const = default;

 private:
  std::uint64_t raw_;
};

inline bool raw_word_is_ref(std::uint64_t w) { return w != 0 && (w & 1) == 0; }

}  // namespace gcprof

#endif  // GCPROF_OBJECT_HPP
