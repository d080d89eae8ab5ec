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
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "ratecon/data.hpp"
#include "ratecon/error.hpp"

using namespace ratecon;

TEST_CASE("rbf features") {
  RowMatrix z(2, 2), w(1, 2);
  z << 0, 0, 1, 0;
  w << 0, 0;
  const RowMatrix x = rbf_features(z, w, 1.0 / std::sqrt(2.0));
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(std::exp(-1.0)));
  const RowMatrix wide = rbf_features(z, w, 1e6);
  CHECK(wide(1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rbf_features(z, w, 0.0), ContractError);
}

TEST_CASE("simulated data") {
  SimulatedSpec s;
  s.n = 300;
  s.sigma = 0.5;
  s.seed = 3;
  s.split_seed = 4;
  const auto a = generate_simulated(s);
  const auto b = generate_simulated(s);
  CHECK(a.train.size() == 100);
  CHECK(a.val.size() == 100);
  CHECK(a.test.size() == 100);
  CHECK(a.train.dim() == 300);
  CHECK(a.train.gather_features() == b.train.gather_features());
  CHECK(a.test.rows() == b.test.rows());

  std::set<Index> seen;
  for (const auto* v : {&a.train, &a.val, &a.test}) seen.insert(v->rows().begin(), v->rows().end());
  CHECK(seen.size() == 300);

  const RowMatrix x = a.train.gather_features();
  CHECK(x.minCoeff() > 0.0);
  CHECK(x.maxCoeff() <= 1.0);

  s.n = 4000;
  s.sigma = 1.0;
  const auto big = generate_simulated(s);
  double pos = 0.0;
  for (const auto* v : {&big.train, &big.val, &big.test}) {
    for (Index i = 0; i < v->size(); ++i) pos += v->label(i) > 0.0 ? 1.0 : 0.0;
  }
  CHECK(std::abs(pos / 4000.0 - 0.5) < 0.03);

  s.split_seed = 5;
  const auto other = generate_simulated(s);
  CHECK(other.train.rows() != big.train.rows());
  s.sigma = -1.0;
  CHECK_THROWS_AS(generate_simulated(s), ContractError);
}

TEST_CASE("train val split") {
  RowMatrix x(5, 1);
  x << 0, 1, 2, 3, 4;
  const auto data = DatasetView::from_arrays(x, Eigen::VectorXd::Ones(5), GroupMatrix(5, 0), {});
  const auto two = split(data, SplitMode::kTwoDataset, 1);
  CHECK(two.train.size() == 3);
  CHECK(two.val.size() == 2);
  std::set<Index> rows(two.train.rows().begin(), two.train.rows().end());
  for (Index r : two.val.rows()) CHECK(rows.count(r) == 0);
  const auto one = split(data, SplitMode::kOneDataset, 1);
  CHECK(one.train.rows() == one.val.rows());
  CHECK(one.train.size() == 5);
  CHECK(split(data, SplitMode::kTwoDataset, 1).train.rows() == two.train.rows());
}

TEST_CASE("csv parsing") {
  const auto t = parse_csv("a, b ,c\n1,\"x, y\",3\n\n4,\"say \"\"hi\"\"\",6\n");
  REQUIRE(t.header.size() == 3);
  CHECK(t.header[1] == "b");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.column("c") == 2);
  CHECK(t.column("zz") == -1);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("a,b\n\"1,2\n"), ParseError);
}

TEST_CASE("percentile") {
  CHECK(nearest_rank_percentile({1, 2, 3, 4}, 50) == 2.0);
  CHECK(nearest_rank_percentile({4, 3, 2, 1, 5}, 50) == 3.0);
  CHECK(nearest_rank_percentile({1, 2, 3}, 100) == 3.0);
  CHECK(nearest_rank_percentile({1, 2, 3}, 0) == 1.0);
}

TEST_CASE("tabular preprocessing") {
  const auto table = parse_csv(
      "age,sex,race,income\n"
      "20,Male,White,<=50K\n"
      "30,Female,Black,>50K\n"
      "40,Male,Black,>50K\n"
      "50,Female,White,<=50K\n"
      "?,Male,White,<=50K\n");
  TabularSpec spec;
  spec.label = {"income", {">50K", ">50K."}, std::nullopt};
  spec.features = {{"age", FeatureKind::kNumeric}, {"sex", FeatureKind::kOneHot},
                   {"age", FeatureKind::kBucketize, 2}, {"age", FeatureKind::kThreshold, 10, 50.0}};
  spec.groups = {{"female", "sex", GroupOp::kEquals, "Female"},
                 {"old", "age", GroupOp::kPercentileAtLeast, "", 50.0},
                 {"young", "age", GroupOp::kLess, "", 35.0}};
  const auto d = load_tabular(spec, table, nullptr);
  CHECK(d.dropped_rows == 1);
  REQUIRE(d.train.size() == 4);
  CHECK(d.feature_names ==
        std::vector<std::string>{"age", "sex=Female", "sex=Male", "age#0", "age#1", "age>=p"});
  const RowMatrix x = d.train.gather_features();
  // Median of {20,30,40,50} is 30; the median itself lands in the upper bucket.
  CHECK(x(0, 3) == 1.0);
  CHECK(x(1, 4) == 1.0);
  CHECK(x(1, 5) == 1.0);
  CHECK(x(0, 5) == 0.0);
  CHECK(x(1, 1) == 1.0);
  CHECK(d.train.label(0) == -1.0);
  CHECK(d.train.label(1) == 1.0);
  CHECK(d.train.in_group(1, 0));
  CHECK_FALSE(d.train.in_group(0, 0));
  CHECK(d.train.in_group(1, 1));
  CHECK_FALSE(d.train.in_group(0, 1));
  CHECK(d.train.in_group(1, 2));
  CHECK_FALSE(d.train.in_group(2, 2));

  // Test rows reuse the training fit; unseen categories get no indicator.
  const auto test = parse_csv("age,sex,race,income\n35,Other,White,>50K.\n");
  const auto both = load_tabular(spec, table, &test);
  REQUIRE(both.test);
  const RowMatrix tx = both.test->gather_features();
  CHECK(tx(0, 1) + tx(0, 2) == 0.0);
  CHECK(both.test->label(0) == 1.0);
  CHECK(both.test->in_group(0, 1));

  const auto bad = parse_csv("age,sex,race,income\nold,Male,White,>50K\n");
  CHECK_THROWS_AS(load_tabular(spec, bad, nullptr), ParseError);
  spec.features.push_back({"missing_column"});
  CHECK_THROWS_AS(load_tabular(spec, table, nullptr), SchemaError);
}

TEST_CASE("overlapping groups and percentile labels") {
  const auto table = parse_csv(
      "race,sex,score\n"
      "A,M,1\nA,F,2\nB,M,3\nB,F,4\nA,M,5\nB,F,6\n");
  TabularSpec spec;
  spec.label.column = "score";
  spec.label.percentile_at_least = 50.0;
  spec.features = {{"race", FeatureKind::kOneHot}, {"sex", FeatureKind::kOneHot}};
  spec.groups = {{"black", "race", GroupOp::kEquals, "B"},
                 {"white", "race", GroupOp::kEquals, "A"},
                 {"female", "sex", GroupOp::kEquals, "F"},
                 {"male", "sex", GroupOp::kEquals, "M"}};
  const auto d = load_tabular(spec, table, nullptr);
  CHECK(d.train.num_groups() == 4);
  for (Index i = 0; i < d.train.size(); ++i) {
    const int race = d.train.in_group(i, 0) + d.train.in_group(i, 1);
    const int sex = d.train.in_group(i, 2) + d.train.in_group(i, 3);
    CHECK(race == 1);
    CHECK(sex == 1);
  }
  // Median of 1..6 is 3: scores >= 3 are positive.
  CHECK(d.train.label(1) == -1.0);
  CHECK(d.train.label(2) == 1.0);
}

TEST_CASE("dataset cache round trip") {
  RowMatrix x(3, 2);
  x << 0.1, -2.5, 1e-300, 3.0, 7.0, 0.3333333333333333;
  Eigen::VectorXd y(3);
  y << 1, -1, 1;
  GroupMatrix g(3, 9);
  g.setZero();
  g(0, 8) = 1;
  g(2, 0) = 1;
  std::vector<std::string> names;
  for (int k = 0; k < 9; ++k) names.push_back("grp" + std::to_string(k));
  const auto data = DatasetView::from_arrays(x, y, g, names);
  const auto path = (std::filesystem::temp_directory_path() / "ratecon_cache_test.bin").string();
  write_dataset_cache(path, data);
  const auto back = read_dataset_cache(path);
  CHECK(back.gather_features() == x);
  CHECK(back.storage().labels == y);
  CHECK(back.storage().groups == g);
  CHECK(back.group_names() == names);
  std::filesystem::remove(path);
  CHECK_THROWS(read_dataset_cache(path));
}
