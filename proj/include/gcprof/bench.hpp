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

#ifndef GCPROF_BENCH_HPP
#define GCPROF_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcprof/workloads.hpp"

namespace gcprof {

struct BenchOptions {
  std::vector<std::string> workloads;
  std::vector<std::uint64_t> periods = {32ull << 10, 128ull << 10,
                                        512ull << 10, 2ull << 20, 4ull << 20};
  std::uint32_t repetitions = 5;
  HeapConfig heap;
  WorkloadParams params;
};

struct BenchMeasurement {
  std::string workload;
  std::uint64_t period = 0;  // 0 = unsampled baseline
  std::uint32_t repetition = 0;
  double runtime_seconds = 0;
  std::uint64_t samples = 0;
  std::uint64_t bytes_allocated = 0;
};

struct BenchRow {
  std::string workload;
  std::uint64_t period = 0;
  double median_runtime = 0;
  std::uint64_t bytes_allocated = 0;
  double gb_allocated = 0;
  double gb_per_second = 0;
  std::uint64_t samples = 0;
  double samples_per_second = 0;
  double overhead = 0;             // runtime_with / runtime_without
  double normalized_overhead = 0;  // 1 + (overhead - 1) / samples_per_s * 1000
};

struct OverheadReport {
  std::vector<BenchMeasurement> measurements;  // includes baselines
  std::vector<BenchRow> rows;                  // one per (workload, period)
  std::vector<BenchRow> baselines;             // one per workload
};

OverheadReport run_bench(const BenchOptions& options);

void write_bench_csv(const OverheadReport& report, std::ostream& out);
void print_bench_table(const OverheadReport& report, std::ostream& out);

double median(std::vector<double> values);

}  // namespace gcprof

#endif  // GCPROF_BENCH_HPP
