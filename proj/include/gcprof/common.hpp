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

#ifndef GCPROF_COMMON_HPP
#define GCPROF_COMMON_HPP

#include <cstdint>
#include <new>
#include <stdexcept>
#include <string>

namespace gcprof {

inline constexpr std::uint64_t kWordBytes = 8;
inline constexpr std::uint64_t kHeaderBytes = 8;

/// Thrown when the old space or large-object space cannot grow further.
class OutOfMemory : public std::bad_alloc {
 public:
  explicit OutOfMemory(std::string what) : what_(std::move(what)) {}
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  std::string what_;
};

/// Thrown when internal heap bookkeeping is inconsistent (e.g. a sampled
/// address that no space recognizes). The fuzz harness treats this as a
/// test failure, not a crash.
class HeapCorruption : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

[[noreturn]] void check_failed(const char* expr, const char* file, int line);

// Always-on precondition check for mutator-facing entry points.
#define GCPROF_CHECK(cond) \
  ((cond) ? void(0) : ::gcprof::check_failed(#cond, __FILE__, __LINE__))

constexpr std::uint64_t round_up(std::uint64_t v, std::uint64_t multiple) {
  return (v + multiple - 1) / multiple * multiple;
}

/// Number of payload words an allocation request occupies. Every object
/// has at least one payload word.
constexpr std::uint64_t payload_words_for(std::uint64_t payload_bytes) {
  return payload_bytes <= kWordBytes
             ? 1
             : (payload_bytes + kWordBytes - 1) / kWordBytes;
}

}  // namespace gcprof

#endif  // GCPROF_COMMON_HPP
