// Copyright 2026 The ratecon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Command-line driver: run / report / sweep / shrink.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "ratecon/error.hpp"
#include "ratecon/experiment.hpp"
#include "ratecon/log.hpp"
#include "ratecon/shrinking.hpp"
#include "ratecon/solvers.hpp"

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string out = "out";
  int workers = 0;
  long long seed = -1;
  long long runs = 0;
};

ratecon::ExperimentConfig load(const Common& c) {
  auto config = ratecon::load_experiment_config(c.config);
  if (c.seed >= 0) config.seed = static_cast<std::uint64_t>(c.seed);
  if (c.runs > 0) config.runs = c.runs;
  if (c.workers > 0) config.workers = c.workers;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ratecon: constrained classifier training with proxy-Lagrangian solvers"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run every (solver, mode, seed) of a config");
  run->add_option("-c,--config", run_opts.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", run_opts.out, "Output directory");
  run->add_option("-w,--workers", run_opts.workers, "Concurrent runs (overrides config)");
  run->add_option("-s,--seed", run_opts.seed, "Base seed (overrides config)");
  run->add_option("-n,--runs", run_opts.runs, "Number of runs (overrides config)");

  Common sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Simulated-data sweep over sigma and hidden units");
  sweep->add_option("-c,--config", sweep_opts.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", sweep_opts.out, "Output directory");
  sweep->add_option("-w,--workers", sweep_opts.workers, "Concurrent runs (overrides config)");
  sweep->add_option("-s,--seed", sweep_opts.seed, "Base seed (overrides config)");
  sweep->add_option("-n,--runs", sweep_opts.runs, "Number of runs (overrides config)");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Re-aggregate runs.csv of a finished run into report.csv");
  report->add_option("-i,--in", report_dir, "Output directory of a previous run")->required()->check(CLI::ExistingDirectory);

  std::string trace_path;
  std::string classifier_path = "classifier.csv";
  bool allow_negative = false;
  auto* shrink_cmd = app.add_subcommand("shrink", "Shrink a trace.csv into a sparse stochastic classifier");
  shrink_cmd->add_option("-t,--trace", trace_path, "trace.csv written by run")->required()->check(CLI::ExistingFile);
  shrink_cmd->add_option("-o,--out", classifier_path, "Classifier CSV to write");
  shrink_cmd->add_flag("--allow-negative-epsilon", allow_negative, "Search violation levels below zero");

  CLI11_PARSE(app, argc, argv);
  if (verbose) ratecon::log::get().set_level(spdlog::level::info);

  try {
    if (*run) {
      const auto config = load(run_opts);
      const auto result = ratecon::run_experiment(config, run_opts.out, config.workers);
      std::cout << ratecon::format_table(result.rows);
      for (const auto& s : result.summary) {
        std::cout << s.dataset << " " << s.algorithm << ": test violation one_dataset " << s.one_dataset_test_violation
                  << " vs two_dataset " << s.two_dataset_test_violation << "\n";
      }
      if (!result.all_completed) {
        std::cerr << "some runs failed; see " << (fs::path(run_opts.out) / "runs.csv").string() << "\n";
        return 1;
      }
      return 0;
    }
    if (*sweep) {
      const auto config = load(sweep_opts);
      const auto result = ratecon::run_sweep(config, sweep_opts.out, config.workers);
      std::cout << "wrote " << result.rows.size() << " rows to "
                << (fs::path(sweep_opts.out) / "sweep.csv").string() << "\n";
      return result.all_completed ? 0 : 1;
    }
    if (*report) {
      const auto records = ratecon::read_runs_csv((fs::path(report_dir) / "runs.csv").string());
      const auto rows = ratecon::aggregate(records);
      ratecon::write_report_csv((fs::path(report_dir) / "report.csv").string(), rows);
      std::cout << ratecon::format_table(rows);
      bool ok = true;
      for (const auto& r : records) ok = ok && r.ok;
      return ok ? 0 : 1;
    }
    if (*shrink_cmd) {
      const auto input = ratecon::read_trace_csv(trace_path);
      ratecon::ShrinkOptions options;
      options.allow_negative_epsilon = allow_negative;
      const auto result = ratecon::shrink(input, options);
      ratecon::write_classifier_csv(classifier_path, result.classifier);
      std::cout << "support " << result.classifier.size() << ", epsilon " << result.epsilon << ", objective "
                << result.objective << ", max violation " << result.max_violation << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
