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

#ifndef GCPROF_CLOCK_HPP
#define GCPROF_CLOCK_HPP

#include <cstdint>

namespace gcprof {

/// Monotonic nanosecond clock. Injected into the profile recorder so tests
/// can run against a deterministic time source.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::uint64_t now_ns() = 0;
};

class SteadyClock final : public Clock {
 public:
  std::uint64_t now_ns() override;
  static SteadyClock& instance();
};

/// Deterministic clock: every read advances by a fixed step so consecutive
/// timestamps are strictly increasing but fully reproducible.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::uint64_t start_ns = 0, std::uint64_t step_ns = 1)
      : now_(start_ns), step_(step_ns) {}

  std::uint64_t now_ns() override {
    std::uint64_t v = now_;
    now_ += step_;
    return v;
  }
  void advance(std::uint64_t ns) { now_ += ns; }

 private:
  std::uint64_t now_;
  std::uint64_t step_;
};

}  // namespace gcprof

#endif  // GCPROF_CLOCK_HPP
