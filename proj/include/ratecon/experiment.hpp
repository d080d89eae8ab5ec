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
#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ratecon/data.hpp"
#include "ratecon/problem.hpp"
#include "ratecon/shrinking.hpp"
#include "ratecon/solvers.hpp"

namespace ratecon {

struct DatasetConfig {
  enum class Type { kSimulated, kTabular };
  Type type = Type::kSimulated;
  std::string name = "simulated";
  SimulatedSpec simulated;
  TabularSpec tabular;
  double test_fraction = 0.0;  // tabular without a designated test file
};

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetConfig dataset;
  LossSpec objective;
  std::vector<RateConstraintSpec> constraints;
  double l2 = 0.0;
  Index hidden_units = 0;
  std::vector<Index> hidden_sweep;   // sweep only; defaults to {hidden_units}
  std::vector<SolverConfig> solvers;  // one entry per (algorithm, mode)
  bool include_unconstrained = false;
  Index runs = 10;
  std::uint64_t seed = 0;
  std::vector<double> sigma_sweep;
  int workers = 1;
  ShrinkOptions shrink;
  bool write_checkpoints = false;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& json);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

// Single entries of the "constraints" and "solvers" arrays; a solver entry with
// several modes expands into one config per mode.
RateConstraintSpec constraint_from_json(const nlohmann::json& json);
std::vector<SolverConfig> solvers_from_json(const nlohmann::json& json);

// One (solver, mode, run) outcome. "train" metrics follow the usual
// reporting split: error on the theta-player's data, violation on the
// lambda-player's data.
struct RunRecord {
  std::string dataset;
  std::string algorithm;
  std::string mode;
  Index run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string reason;
  double train_error = 0.0;
  double train_violation = 0.0;
  double theta_data_violation = 0.0;  // max violation measured on the theta-player's data
  double test_error = 0.0;
  double test_violation = 0.0;
  double epsilon = 0.0;
  Index support_size = 0;
  std::string artifacts;  // run directory relative to the output root
};

struct ReportRow {
  std::string dataset;
  std::string algorithm;
  std::string mode;
  std::string split;  // "train" or "test"
  double error_mean = 0.0;
  double error_std = 0.0;
  double violation_mean = 0.0;
  double violation_std = 0.0;
  Index completed = 0;
  Index attempted = 0;
  // Diagnostics: mean (val - theta-data) and (test - val) max violation.
  double gap_val_minus_train = 0.0;
  double gap_test_minus_val = 0.0;
};

struct GeneralizationSummary {
  std::string dataset;
  std::string algorithm;
  double one_dataset_test_violation = 0.0;
  double two_dataset_test_violation = 0.0;
  double gap = 0.0;  // one-dataset minus two-dataset test violation
  double one_dataset_spread = 0.0;  // test minus train violation
  double two_dataset_spread = 0.0;
  int effect_sign = 0;  // sign of gap
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<ReportRow> rows;
  std::vector<GeneralizationSummary> summary;
  bool all_completed = true;
};

// Every (solver, mode, seed): split -> train -> shrink -> evaluate. Any
// failed run is recorded with its reason and excluded from aggregates.
// When output_dir is non-empty, writes runs.csv, report.csv, summary.json
// and per-run artifacts below it.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& output_dir, int workers);

// Mean and sample standard deviation over completed runs, grouped by
// (dataset, algorithm, mode) with one row per split.
std::vector<ReportRow> aggregate(const std::vector<RunRecord>& records);

std::vector<GeneralizationSummary> compare_generalization(const std::vector<ReportRow>& rows);

struct SweepRow {
  double sigma = 0.0;
  Index hidden_units = 0;
  ReportRow row;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool all_completed = true;
};

// Simulated-data sweep over config.sigma_sweep x config.hidden_sweep.
SweepResult run_sweep(const ExperimentConfig& config, const std::string& output_dir, int workers);

void write_runs_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_runs_csv(const std::string& path);
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

// Error / violation table, one line per (dataset, split), one column pair
// per (algorithm, mode).
std::string format_table(const std::vector<ReportRow>& rows);

}  // namespace ratecon
