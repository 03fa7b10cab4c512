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

#include "gcprof/bench.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace gcprof {

double median(std::vector<double> values) {
  GCPROF_CHECK(!values.empty());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

/// The overhead of a configuration is the median over repetitions of
/// runtime_with_sampling / runtime_without_sampling, each repetition paired
/// with the baseline run of the same round. Pairing keeps slow drift and
/// load bursts out of the ratio.
BenchRow summarize(const std::string& workload, std::uint64_t period,
                   const std::vector<BenchMeasurement>& reps,
                   const std::vector<BenchMeasurement>& baseline) {
  BenchRow row;
  row.workload = workload;
  row.period = period;
  std::vector<double> runtimes;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    runtimes.push_back(reps[i].runtime_seconds);
    ratios.push_back(reps[i].runtime_seconds /
                     baseline[std::min(i, baseline.size() - 1)].runtime_seconds);
  }
  row.median_runtime = median(runtimes);
  row.bytes_allocated = reps.front().bytes_allocated;
  row.gb_allocated = static_cast<double>(row.bytes_allocated) / 1e9;
  row.gb_per_second = row.gb_allocated / row.median_runtime;
  row.samples = reps.front().samples;
  row.samples_per_second =
      static_cast<double>(row.samples) / row.median_runtime;
  row.overhead = median(ratios);
  row.normalized_overhead =
      row.samples_per_second > 0
          ? 1.0 + (row.overhead - 1.0) / row.samples_per_second * 1000.0
          : row.overhead;
  return row;
}

}  // namespace

OverheadReport run_bench(const BenchOptions& options) {
  OverheadReport report;
  std::vector<std::string> workloads =
      options.workloads.empty() ? workload_names() : options.workloads;

  for (const auto& workload : workloads) {
    // One discarded warmup run, then repetitions interleaved across the
    // baseline and every period, rotating the order each round, so neither
    // slow machine drift nor within-round position effects can bias the
    // overhead ratios.
    run_workload(workload, options.params, options.heap, 0,
                 SteadyClock::instance());
    std::vector<BenchMeasurement> baseline;
    std::vector<std::vector<BenchMeasurement>> by_period(options.periods.size());
    const std::size_t n_configs = options.periods.size() + 1;
    for (std::uint32_t rep = 0; rep < options.repetitions; ++rep) {
      for (std::size_t slot = 0; slot < n_configs; ++slot) {
        const std::size_t config = (slot + rep) % n_configs;
        const std::uint64_t period =
            config == 0 ? 0 : options.periods[config - 1];
        RunResult r = run_workload(workload, options.params, options.heap,
                                   period, SteadyClock::instance());
        const BenchMeasurement m{workload,  period,
                                 rep,       r.runtime_seconds,
                                 r.samples, r.workload.bytes_allocated};
        if (config == 0)
          baseline.push_back(m);
        else
          by_period[config - 1].push_back(m);
      }
    }
    report.measurements.insert(report.measurements.end(), baseline.begin(),
                               baseline.end());
    report.baselines.push_back(summarize(workload, 0, baseline, baseline));
    for (std::size_t p = 0; p < options.periods.size(); ++p) {
      report.measurements.insert(report.measurements.end(),
                                 by_period[p].begin(), by_period[p].end());
      report.rows.push_back(
          summarize(workload, options.periods[p], by_period[p], baseline));
    }
  }
  return report;
}

void write_bench_csv(const OverheadReport& report, std::ostream& out) {
  out << "workload,period,repetition,runtime_s,samples,bytes_allocated\n";
  for (const auto& m : report.measurements) {
    out << m.workload << ',' << m.period << ',' << m.repetition << ','
        << m.runtime_seconds << ',' << m.samples << ',' << m.bytes_allocated
        << '\n';
  }
  out << "\nworkload,period,median_runtime_s,gb_allocated,gb_per_s,samples,"
         "samples_per_s,overhead,normalized_overhead\n";
  for (const auto& r : report.rows) {
    out << r.workload << ',' << r.period << ',' << r.median_runtime << ','
        << r.gb_allocated << ',' << r.gb_per_second << ',' << r.samples << ','
        << r.samples_per_second << ',' << r.overhead << ','
        << r.normalized_overhead << '\n';
  }
}

void print_bench_table(const OverheadReport& report, std::ostream& out) {
  out << std::left << std::setw(14) << "workload" << std::right << std::setw(12)
      << "period" << std::setw(12) << "runtime(s)" << std::setw(12) << "GB"
      << std::setw(10) << "GB/s" << std::setw(12) << "samples/s"
      << std::setw(10) << "overhead" << std::setw(12) << "norm.ovh" << '\n';
  auto print_row = [&](const BenchRow& r, bool is_baseline) {
    out << std::left << std::setw(14) << r.workload << std::right
        << std::setw(12);
    if (is_baseline)
      out << "baseline";
    else
      out << r.period;
    out << std::fixed << std::setprecision(3) << std::setw(12)
        << r.median_runtime << std::setw(12) << r.gb_allocated << std::setw(10)
        << std::setprecision(2) << r.gb_per_second << std::setw(12)
        << std::setprecision(0) << r.samples_per_second << std::setw(10)
        << std::setprecision(3) << r.overhead << std::setw(12)
        << r.normalized_overhead << '\n';
    out.unsetf(std::ios::fixed);
  };
  for (const auto& b : report.baselines) {
    print_row(b, true);
    for (const auto& r : report.rows)
      if (r.workload == b.workload) print_row(r, false);
  }
}

}  // namespace gcprof
