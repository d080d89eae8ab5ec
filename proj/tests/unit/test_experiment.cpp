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
#include <fstream>
#include <random>
#include <sstream>

#include "ratecon/error.hpp"
#include "ratecon/experiment.hpp"

using namespace ratecon;
using nlohmann::json;

namespace {

json tiny() {
  return json::parse(R"({
    "name": "t",
    "dataset": {"type": "simulated", "n": 90, "sigma": 0.5},
    "constraints": [{"kind": "recall_floor", "threshold": 0.9}],
    "solvers": [{"algorithm": "practical", "modes": ["two_dataset", "one_dataset"], "iterations": 30,
                 "batch_size": 8, "snapshots": 5, "eta_theta": 0.05}],
    "include_unconstrained": true,
    "runs": 2,
    "seed": 3
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_experiment_config(tiny());
  CHECK(c.solvers.size() == 2);
  CHECK(c.solvers[0].mode == DatasetMode::kTwoDataset);
  CHECK(c.solvers[1].mode == DatasetMode::kOneDataset);
  CHECK(c.solvers[0].iterations == 30);
  CHECK(c.runs == 2);
  CHECK(c.constraints[0].threshold == 0.9);

  auto j = tiny();
  j.erase("runs");
  CHECK(parse_experiment_config(j).runs == 10);

  j = tiny();
  j["bogus"] = 1;
  CHECK_THROWS_AS(parse_experiment_config(j), ParseError);
  j = tiny();
  j["solvers"][0]["iteratons"] = 5;
  CHECK_THROWS_AS(parse_experiment_config(j), ParseError);
  j = tiny();
  j["solvers"][0]["algorithm"] = "nope";
  CHECK_THROWS_AS(parse_experiment_config(j), ParseError);
  j = tiny();
  j["constraints"] = json::array();
  CHECK_THROWS_AS(parse_experiment_config(j), ContractError);
  j = tiny();
  j["dataset"]["type"] = "other";
  CHECK_THROWS_AS(parse_experiment_config(j), ParseError);

  j = tiny();
  j["dataset"] = json::parse(R"({"type": "tabular", "path": "x.csv", "label": {"column": "y", "positive": ["1"]},
                                 "features": [{"column": "a"}]})");
  CHECK(parse_experiment_config(j).runs == 2);
  j.erase("runs");
  CHECK(parse_experiment_config(j).runs == 100);
}

TEST_CASE("config json round trip") {
  auto j = tiny();
  j["constraints"].push_back(json::parse(
      R"({"kind": "custom", "name": "np", "constant": -0.1,
          "terms": [{"coefficient": 1.0, "label": "negative"}]})"));
  const auto c = parse_experiment_config(j);
  const auto again = parse_experiment_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(again.constraints.size() == 2);
  CHECK(again.constraints[1].constant == -0.1);
}

TEST_CASE("aggregation matches an independent pass") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::vector<RunRecord> records;
  for (const char* mode : {"two_dataset", "one_dataset"}) {
    for (Index r = 0; r < 7; ++r) {
      RunRecord rec;
      rec.dataset = "d";
      rec.algorithm = "practical";
      rec.mode = mode;
      rec.run = r;
      rec.ok = r != 3;
      rec.train_error = u(rng);
      rec.train_violation = u(rng) - 0.1;
      rec.theta_data_violation = u(rng) - 0.1;
      rec.test_error = u(rng);
      rec.test_violation = u(rng) - 0.1;
      records.push_back(rec);
    }
  }
  const auto rows = aggregate(records);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    double sum = 0.0, sq = 0.0, gap = 0.0;
    int n = 0;
    for (const auto& r : records) {
      if (r.mode != row.mode || !r.ok) continue;
      const double v = row.split == "train" ? r.train_violation : r.test_violation;
      sum += v;
      sq += v * v;
      gap += r.test_violation - r.train_violation;
      ++n;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
    CHECK(row.completed == 6);
    CHECK(row.attempted == 7);
    CHECK(std::abs(row.violation_mean - mean) < 1e-12);
    CHECK(std::abs(row.violation_std - sd) < 1e-12);
    CHECK(std::abs(row.gap_test_minus_val - gap / n) < 1e-12);
  }
  const auto summary = compare_generalization(rows);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].gap == doctest::Approx(rows[3].violation_mean - rows[1].violation_mean));
}

TEST_CASE("identical modes give a zero gap") {
  std::vector<RunRecord> records;
  for (const char* mode : {"two_dataset", "one_dataset"}) {
    RunRecord rec;
    rec.dataset = "d";
    rec.algorithm = "a";
    rec.mode = mode;
    rec.ok = true;
    rec.test_violation = 0.125;
    records.push_back(rec);
  }
  const auto s = compare_generalization(aggregate(records));
  REQUIRE(s.size() == 1);
  CHECK(s[0].gap == 0.0);
  CHECK(s[0].effect_sign == 0);
}

TEST_CASE("runs csv round trip") {
  RunRecord rec;
  rec.dataset = "d,1";
  rec.algorithm = "practical";
  rec.mode = "two_dataset";
  rec.run = 4;
  rec.seed = 12;
  rec.ok = false;
  rec.reason = "it \"broke\"";
  rec.test_violation = 0.1 + 0.2;
  const auto path = (std::filesystem::temp_directory_path() / "ratecon_runs_test.csv").string();
  write_runs_csv(path, {rec});
  const auto back = read_runs_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].dataset == rec.dataset);
  CHECK(back[0].reason == rec.reason);
  CHECK(back[0].test_violation == rec.test_violation);
  CHECK(back[0].ok == false);
  CHECK(back[0].seed == 12);
  std::filesystem::remove(path);
}

TEST_CASE("experiment output is byte deterministic across worker counts") {
  const auto c = parse_experiment_config(tiny());
  const auto root = std::filesystem::temp_directory_path() / "ratecon_experiment_test";
  std::filesystem::remove_all(root);
  const auto a = run_experiment(c, (root / "a").string(), 1);
  const auto b = run_experiment(c, (root / "b").string(), 3);
  CHECK(a.all_completed);
  CHECK(a.records.size() == 6);
  CHECK(a.rows.size() == 6);
  CHECK(slurp(root / "a" / "report.csv") == slurp(root / "b" / "report.csv"));
  CHECK(slurp(root / "a" / "runs.csv") == slurp(root / "b" / "runs.csv"));
  CHECK(slurp(root / "a" / "summary.json") == slurp(root / "b" / "summary.json"));
  CHECK(std::filesystem::exists(root / "a" / "runs" / "unconstrained_one_dataset" / "run_1" / "trace.csv"));
  for (const auto& r : a.records) {
    CHECK(r.support_size >= 1);
    CHECK(r.support_size <= 2);
  }
  std::filesystem::remove_all(root);
}

TEST_CASE("shipped configs parse") {
  const auto dir = std::filesystem::path(RATECON_SOURCE_DIR) / "configs";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_experiment_config(entry.path().string()));
  }
}

TEST_CASE("adult config runs on a synthetic file with the same columns") {
  const auto root = std::filesystem::temp_directory_path() / "ratecon_adult_test";
  std::filesystem::create_directories(root);
  const char* header =
      "age,workclass,fnlwgt,education,education-num,marital-status,occupation,relationship,race,sex,"
      "capital-gain,capital-loss,hours-per-week,native-country,income\n";
  std::mt19937_64 rng(4);
  auto pick = [&](std::initializer_list<const char*> xs) { return *(xs.begin() + rng() % xs.size()); };
  for (const char* name : {"train.csv", "test.csv"}) {
    std::ofstream out(root / name);
    out << header;
    for (int i = 0; i < 160; ++i) {
      const bool rich = rng() % 3 == 0;
      out << 20 + rng() % 50 << "," << pick({"Private", "State-gov", "?"}) << ",1000,"
          << pick({"Bachelors", "HS-grad"}) << ",10," << pick({"Married", "Never-married"}) << ","
          << pick({"Sales", "Tech-support"}) << "," << pick({"Husband", "Wife"}) << ","
          << pick({"White", "Black"}) << "," << pick({"Male", "Female"}) << "," << (rich ? 5000 : 0) << ",0,"
          << 20 + rng() % 40 << ",United-States,";
      // The UCI test file spells its labels with a trailing period.
      const std::string positive = std::string(name) == "test.csv" ? ">50K." : ">50K";
      out << (rich ? positive : "<=50K") << "\n";
    }
  }
  ExperimentConfig c =
      load_experiment_config((std::filesystem::path(RATECON_SOURCE_DIR) / "configs" / "adult.json").string());
  c.dataset.tabular.path = (root / "train.csv").string();
  c.dataset.tabular.test_path = (root / "test.csv").string();
  c.runs = 1;
  c.hidden_units = 4;
  for (auto& s : c.solvers) {
    s.iterations = 40;
    s.num_snapshots = 5;
  }
  const auto result = run_experiment(c, "", 1);
  CHECK(result.all_completed);
  CHECK(result.records.size() == 5);
  std::filesystem::remove_all(root);
}
