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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gcprof/bench.hpp"
#include "gcprof/firefox.hpp"
#include "gcprof/fuzz.hpp"
#include "gcprof/profile_io.hpp"
#include "gcprof/workloads.hpp"

namespace {

int cmd_run(const std::string& workload, std::uint64_t sample_bytes,
            std::uint64_t nursery_bytes, const std::string& out_path,
            const gcprof::WorkloadParams& params) {
  if (!gcprof::is_workload(workload)) {
    std::cerr << "unknown workload: " << workload << "\navailable:";
    for (const auto& n : gcprof::workload_names()) std::cerr << ' ' << n;
    std::cerr << '\n';
    return 2;
  }
  gcprof::HeapConfig config;
  if (nursery_bytes != 0) config.nursery_size = nursery_bytes;
  gcprof::Profile profile;
  gcprof::RunResult result =
      gcprof::run_workload(workload, params, config, sample_bytes,
                           gcprof::SteadyClock::instance(), &profile);
  if (!out_path.empty()) gcprof::write_profile_file(profile, out_path);

  std::cout << "workload:          " << workload << '\n'
            << "sampling period:   " << sample_bytes << " bytes"
            << (sample_bytes == 0 ? " (disabled)" : "") << '\n'
            << "runtime:           " << result.runtime_seconds << " s\n"
            << "bytes allocated:   " << result.workload.bytes_allocated << '\n'
            << "objects allocated: " << result.workload.objects_allocated << '\n'
            << "samples:           " << result.samples << '\n'
            << "minor collections: " << result.minor_collections << '\n';
  if (!out_path.empty())
    std::cout << "profile written:   " << out_path << '\n';
  return 0;
}

int cmd_convert(const std::string& in_path, const std::string& out_path) {
  const auto bytes = gcprof::read_file_bytes(in_path);
  gcprof::firefox::ConvertStats stats;
  nlohmann::json doc;
  try {
    doc = gcprof::firefox::convert(bytes, &stats);
  } catch (const gcprof::ProfileParseError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open for writing: " << out_path << '\n';
    return 2;
  }
  out << doc.dump() << '\n';

  const auto violations = gcprof::firefox::validate(doc);
  std::cout << "samples:        " << stats.samples << '\n'
            << "markers:        " << stats.markers << '\n'
            << "counter points: " << stats.counter_points << '\n';
  if (stats.unknown_records > 0)
    std::cout << "warning: skipped " << stats.unknown_records
              << " unknown records\n";
  if (!violations.empty()) {
    std::cerr << violations.size() << " structural violations:\n";
    for (const auto& v : violations) std::cerr << "  " << v << '\n';
    return 4;
  }
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int cmd_fuzz(const gcprof::fuzz::FuzzOptions& options,
             const std::string& replay_path, const std::string& dump_path) {
  using namespace gcprof::fuzz;
  if (!replay_path.empty()) {
    std::ifstream in(replay_path);
    if (!in) {
      std::cerr << "cannot open replay file: " << replay_path << '\n';
      return 2;
    }
    auto actions = parse_actions(in);
    auto result = execute_and_check(actions, options.heap);
    if (result.failure) {
      std::cerr << "replay failed at action " << result.failure->action_index
                << ": " << result.failure->detail << '\n';
      return 1;
    }
    std::cout << "replay of " << actions.size() << " actions passed ("
              << result.samples << " samples)\n";
    return 0;
  }

  FuzzRunReport report = run_fuzz(options);
  std::cout << "sequences:          " << report.sequences_run << '\n'
            << "actions:            " << report.actions_run << '\n'
            << "samples checked:    " << report.total_samples << '\n'
            << "minor collections:  " << report.total_minor_collections << '\n'
            << "large allocations:  " << report.total_large_allocations << '\n'
            << "runtime:            " << report.seconds << " s\n";
  if (!report.failure) {
    std::cout << "result: PASS\n";
    return 0;
  }
  std::cerr << "result: FAIL (seed " << report.failing_seed << ", "
            << report.failure->check << ")\n"
            << report.failure->detail << '\n';
  const std::string path =
      dump_path.empty() ? "fuzz-failure-" + std::to_string(report.failing_seed) +
                              ".txt"
                        : dump_path;
  std::ofstream out(path);
  out << "# gcprof fuzz failure, seed " << report.failing_seed << '\n'
      << "# " << report.failure->detail << '\n'
      << format_actions(report.failing_actions);
  std::cerr << "failing sequence (" << report.failing_actions.size()
            << " actions) written to " << path << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcprof: generational GC with sampling allocation profiler"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run an instrumented workload");
  std::string workload = "gcbench_like";
  std::uint64_t sample_bytes = 0;
  std::uint64_t nursery_bytes = 0;
  std::string out_path;
  gcprof::WorkloadParams params;
  run->add_option("workload", workload, "workload name");
  run->add_option("--sample-bytes", sample_bytes,
                  "sampling period in bytes (0 disables)");
  run->add_option("--nursery-bytes", nursery_bytes, "nursery size in bytes");
  run->add_option("--out", out_path, "profile output path");
  run->add_option("--tree-depth", params.tree_depth, "gcbench tree depth");
  run->add_option("--rounds", params.rounds, "gcbench rounds");
  run->add_option("--node-bytes", params.node_payload_bytes,
                  "gcbench node payload bytes");
  run->add_option("--iterations", params.iterations, "alloc_loop iterations");
  run->add_option("--churn-iterations", params.churn_iterations,
                  "string_churn iterations");

  // bench --------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "sweep sampling periods and "
                                            "report overhead metrics");
  gcprof::BenchOptions bench_options;
  std::string csv_path;
  std::uint64_t bench_nursery = 0;
  bench->add_option("--workloads", bench_options.workloads,
                    "workloads to benchmark (default: all)");
  bench->add_option("--periods", bench_options.periods,
                    "sampling periods in bytes");
  bench->add_option("--repetitions", bench_options.repetitions,
                    "repetitions per configuration");
  bench->add_option("--csv", csv_path, "write per-repetition CSV here");
  bench->add_option("--nursery-bytes", bench_nursery, "nursery size in bytes");
  bench->add_option("--tree-depth", bench_options.params.tree_depth,
                    "gcbench tree depth");
  bench->add_option("--rounds", bench_options.params.rounds, "gcbench rounds");
  bench->add_option("--node-bytes", bench_options.params.node_payload_bytes,
                    "gcbench node payload bytes");
  bench->add_option("--iterations", bench_options.params.iterations,
                    "alloc_loop iterations");
  bench->add_option("--churn-iterations",
                    bench_options.params.churn_iterations,
                    "string_churn iterations");

  // convert ------------------------------------------------------------
  auto* convert = app.add_subcommand(
      "convert", "convert a profile to Firefox Profiler JSON");
  std::string convert_in, convert_out;
  convert->add_option("input", convert_in, "GPRF profile path")->required();
  convert->add_option("--out", convert_out, "JSON output path")->required();

  // fuzz ---------------------------------------------------------------
  auto* fuzz = app.add_subcommand(
      "fuzz", "randomized differential testing against the sampling oracle");
  gcprof::fuzz::FuzzOptions fuzz_options;
  std::string replay_path, dump_path;
  std::uint64_t fuzz_nursery = 0;
  fuzz->add_option("--seed", fuzz_options.seed, "random seed");
  fuzz->add_option("--sequences", fuzz_options.sequences,
                   "number of action sequences");
  fuzz->add_option("--actions-per-sequence", fuzz_options.actions_per_sequence,
                   "actions per sequence");
  fuzz->add_flag("--shrink,!--no-shrink", fuzz_options.shrink_failures,
                 "shrink failing sequences (default on)");
  fuzz->add_option("--nursery-bytes", fuzz_nursery, "nursery size in bytes");
  fuzz->add_option("--replay", replay_path, "replay an action file");
  fuzz->add_option("--out", dump_path, "where to dump a failing sequence");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(workload, sample_bytes, nursery_bytes, out_path, params);
    if (bench->parsed()) {
      if (bench_nursery != 0) bench_options.heap.nursery_size = bench_nursery;
      gcprof::OverheadReport report = gcprof::run_bench(bench_options);
      gcprof::print_bench_table(report, std::cout);
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) {
          std::cerr << "cannot open for writing: " << csv_path << '\n';
          return 2;
        }
        gcprof::write_bench_csv(report, csv);
        std::cout << "csv written: " << csv_path << '\n';
      }
      return 0;
    }
    if (convert->parsed()) return cmd_convert(convert_in, convert_out);
    if (fuzz->parsed()) {
      if (fuzz_nursery != 0) fuzz_options.heap.nursery_size = fuzz_nursery;
      return cmd_fuzz(fuzz_options, replay_path, dump_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
