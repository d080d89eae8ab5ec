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

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratecon/dataset.hpp"

namespace ratecon {

// Two-component Gaussian mixture in R^2 mapped to RBF features against a
// second draw of n points from the same mixture.
struct SimulatedSpec {
  Index n = 1000;
  double sigma = 1.0;
  Eigen::Vector2d mean_negative{-1.0, 0.0};
  Eigen::Vector2d mean_positive{1.0, 0.0};
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
  double positive_probability = 0.5;
  std::uint64_t seed = 0;        // draws of z and w
  std::uint64_t split_seed = 0;  // train/val/test permutation

  void validate() const;
};

struct ThreeWaySplit {
  DatasetView train;
  DatasetView val;
  DatasetView test;
};

// x_ij = exp(-||z_i - w_j||^2 / (2 sigma^2)); labels +1 for the positive
// component; equal thirds for train/val/test (remainder goes to test).
ThreeWaySplit generate_simulated(const SimulatedSpec& spec);

// The RBF map on its own, for callers holding z and w.
RowMatrix rbf_features(const Eigen::Ref<const RowMatrix>& z, const Eigen::Ref<const RowMatrix>& w, double sigma);

enum class FeatureKind {
  kNumeric,    // raw value
  kOneHot,     // one indicator per category seen in the fitting rows
  kBucketize,  // one indicator per quantile bucket (edges from fitting rows)
  kThreshold,  // single indicator value >= percentile (from fitting rows)
};

struct FeatureSpec {
  std::string column;
  FeatureKind kind = FeatureKind::kNumeric;
  int buckets = 10;           // kBucketize
  double percentile = 50.0;   // kThreshold
};

enum class GroupOp {
  kEquals,
  kNotEquals,
  kGreaterEqual,
  kLess,
  kPercentileAtLeast,  // value >= p-th percentile of the fitting rows
  kPercentileBelow,
};

struct GroupSpec {
  std::string name;
  std::string column;
  GroupOp op = GroupOp::kEquals;
  std::string value;         // category for kEquals / kNotEquals
  double number = 0.0;       // threshold or percentile
};

struct LabelSpec {
  std::string column;
  std::vector<std::string> positive_values;  // categorical labels
  std::optional<double> percentile_at_least;  // numeric labels: +1 iff >= percentile
};

struct TabularSpec {
  std::string path;       // training file
  std::string test_path;  // optional designated test file
  LabelSpec label;
  std::vector<FeatureSpec> features;
  std::vector<GroupSpec> groups;
  std::string missing_token = "?";

  void validate() const;
};

struct TabularData {
  DatasetView train;
  std::optional<DatasetView> test;
  std::vector<std::string> feature_names;
  Index dropped_rows = 0;
};

// Parsed CSV table: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

// Fits preprocessing (categories, bucket edges, percentiles) on the training
// file and applies it to both files. Rows with missing values in any used
// column are dropped.
TabularData load_tabular(const TabularSpec& spec);
TabularData load_tabular(const TabularSpec& spec, const CsvTable& train, const CsvTable* test);

// Nearest-rank percentile: sorted[ceil(p/100 * n) - 1].
double nearest_rank_percentile(std::vector<double> values, double percentile);

struct DatasetSplit {
  DatasetView train;
  DatasetView val;
};

enum class SplitMode { kTwoDataset, kOneDataset };

// Two-dataset: disjoint random halves (train gets the extra example on odd
// n). One-dataset: both views alias every example.
DatasetSplit split(const DatasetView& data, SplitMode mode, std::uint64_t seed);

// Binary cache: magic line, sizes, group names, row-major float64 features,
// int8 labels, packed group bitmap. Little-endian throughout.
void write_dataset_cache(const std::string& path, const DatasetView& data);
DatasetView read_dataset_cache(const std::string& path);

}  // namespace ratecon
