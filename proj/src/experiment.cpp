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
#include "ratecon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "ratecon/error.hpp"
#include "ratecon/log.hpp"
#include "ratecon/random.hpp"

namespace ratecon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDrawStream = 10;
constexpr std::uint64_t kSimSplitStream = 11;
constexpr std::uint64_t kTestStream = 12;
constexpr std::uint64_t kValStream = 13;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for directory names.
std::string tag(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Strict object access: every key must be known.
class Fields {
 public:
  Fields(const json& j, std::string where, std::initializer_list<const char*> known) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ParseError(where_ + ": expected an object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!allowed.count(it.key())) throw ParseError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const {
    if (!j_.contains(key)) throw ParseError(where_ + ": missing key '" + std::string(key) + "'");
    return j_.at(key);
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError(where_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  T require(const char* key) const {
    try {
      return at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError(where_ + "." + key + ": " + e.what());
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
};

ObjectiveKind objective_from_string(const std::string& s) {
  if (s == "error_rate") return ObjectiveKind::kErrorRate;
  if (s == "false_positive_rate") return ObjectiveKind::kFalsePositiveRate;
  if (s == "false_negative_rate") return ObjectiveKind::kFalseNegativeRate;
  throw ParseError("unknown objective '" + s + "'");
}

const char* objective_to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::kErrorRate: return "error_rate";
    case ObjectiveKind::kFalsePositiveRate: return "false_positive_rate";
    case ObjectiveKind::kFalseNegativeRate: return "false_negative_rate";
  }
  return "?";
}

LabelFilter label_filter_from_string(const std::string& s) {
  if (s == "any") return LabelFilter::kAny;
  if (s == "positive") return LabelFilter::kPositive;
  if (s == "negative") return LabelFilter::kNegative;
  throw ParseError("unknown label filter '" + s + "'");
}

const char* label_filter_to_string(LabelFilter f) {
  switch (f) {
    case LabelFilter::kAny: return "any";
    case LabelFilter::kPositive: return "positive";
    case LabelFilter::kNegative: return "negative";
  }
  return "?";
}

const std::vector<std::pair<const char*, FeatureKind>> kFeatureKinds = {
    {"numeric", FeatureKind::kNumeric},
    {"one_hot", FeatureKind::kOneHot},
    {"bucketize", FeatureKind::kBucketize},
    {"threshold", FeatureKind::kThreshold}};

const std::vector<std::pair<const char*, GroupOp>> kGroupOps = {
    {"equals", GroupOp::kEquals},
    {"not_equals", GroupOp::kNotEquals},
    {"greater_equal", GroupOp::kGreaterEqual},
    {"less", GroupOp::kLess},
    {"percentile_at_least", GroupOp::kPercentileAtLeast},
    {"percentile_below", GroupOp::kPercentileBelow}};

template <typename E>
E lookup(const std::vector<std::pair<const char*, E>>& table, const std::string& name, const char* what) {
  for (const auto& [k, v] : table) {
    if (name == k) return v;
  }
  throw ParseError(std::string("unknown ") + what + " '" + name + "'");
}

template <typename E>
const char* reverse(const std::vector<std::pair<const char*, E>>& table, E value) {
  for (const auto& [k, v] : table) {
    if (v == value) return k;
  }
  return "?";
}

Eigen::Vector2d vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected two numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

DatasetConfig parse_dataset(const json& j) {
  DatasetConfig d;
  const std::string type = j.is_object() && j.contains("type") ? j.at("type").get<std::string>() : "";
  if (type == "simulated") {
    Fields f(j, "dataset", {"type", "name", "n", "sigma", "mean_negative", "mean_positive", "covariance",
                            "positive_probability"});
    d.type = DatasetConfig::Type::kSimulated;
    d.name = f.get<std::string>("name", "simulated");
    d.simulated.n = f.get<Index>("n", 1000);
    d.simulated.sigma = f.get<double>("sigma", 1.0);
    if (f.has("mean_negative")) d.simulated.mean_negative = vec2(f.at("mean_negative"), "dataset.mean_negative");
    if (f.has("mean_positive")) d.simulated.mean_positive = vec2(f.at("mean_positive"), "dataset.mean_positive");
    if (f.has("covariance")) {
      const auto& c = f.at("covariance");
      if (!c.is_array() || c.size() != 2) throw ParseError("dataset.covariance: expected a 2x2 array");
      d.simulated.covariance.row(0) = vec2(c[0], "dataset.covariance").transpose();
      d.simulated.covariance.row(1) = vec2(c[1], "dataset.covariance").transpose();
    }
    d.simulated.positive_probability = f.get<double>("positive_probability", 0.5);
    return d;
  }
  if (type != "tabular") throw ParseError("dataset.type must be 'simulated' or 'tabular'");
  Fields f(j, "dataset", {"type", "name", "path", "test_path", "label", "features", "groups", "missing",
                          "test_fraction"});
  d.type = DatasetConfig::Type::kTabular;
  d.name = f.get<std::string>("name", "tabular");
  auto& t = d.tabular;
  t.path = f.require<std::string>("path");
  t.test_path = f.get<std::string>("test_path", "");
  t.missing_token = f.get<std::string>("missing", "?");
  d.test_fraction = f.get<double>("test_fraction", 0.0);
  {
    Fields lf(f.at("label"), "dataset.label", {"column", "positive", "percentile_at_least"});
    t.label.column = lf.require<std::string>("column");
    t.label.positive_values = lf.get<std::vector<std::string>>("positive", {});
    if (lf.has("percentile_at_least")) t.label.percentile_at_least = lf.require<double>("percentile_at_least");
  }
  for (const auto& fj : f.at("features")) {
    Fields ff(fj, "dataset.features[]", {"column", "kind", "buckets", "percentile"});
    FeatureSpec fs;
    fs.column = ff.require<std::string>("column");
    fs.kind = lookup(kFeatureKinds, ff.get<std::string>("kind", "numeric"), "feature kind");
    fs.buckets = ff.get<int>("buckets", 10);
    fs.percentile = ff.get<double>("percentile", 50.0);
    t.features.push_back(fs);
  }
  if (f.has("groups")) {
    for (const auto& gj : f.at("groups")) {
      Fields gf(gj, "dataset.groups[]", {"name", "column", "op", "value", "number"});
      GroupSpec gs;
      gs.name = gf.require<std::string>("name");
      gs.column = gf.require<std::string>("column");
      gs.op = lookup(kGroupOps, gf.get<std::string>("op", "equals"), "group op");
      gs.value = gf.get<std::string>("value", "");
      gs.number = gf.get<double>("number", 0.0);
      t.groups.push_back(gs);
    }
  }
  return d;
}

RateConstraintSpec parse_constraint(const json& j) {
  Fields f(j, "constraints[]", {"kind", "group", "threshold", "slack", "name", "terms", "constant"});
  const ConstraintKind kind = constraint_kind_from_string(f.require<std::string>("kind"));
  RateConstraintSpec s;
  switch (kind) {
    case ConstraintKind::kRecallFloor:
      s = RateConstraintSpec::recall_floor(f.require<double>("threshold"), f.get<std::string>("group", ""));
      break;
    case ConstraintKind::kPositiveRateRatioFloor:
      s = RateConstraintSpec::positive_rate_ratio_floor(f.require<double>("threshold"),
                                                        f.require<std::string>("group"));
      break;
    case ConstraintKind::kPositiveRateGapCapOnPositives:
      s = RateConstraintSpec::positive_rate_gap_cap_on_positives(f.require<double>("threshold"),
                                                                 f.require<std::string>("group"));
      break;
    case ConstraintKind::kGroupFprVsOverall:
      s = RateConstraintSpec::group_fpr_vs_overall(f.require<std::string>("group"), f.get<double>("slack", 0.0));
      break;
    case ConstraintKind::kCustom: {
      std::vector<RateTerm> terms;
      for (const auto& tj : f.at("terms")) {
        Fields tf(tj, "constraints[].terms[]", {"coefficient", "label", "group"});
        terms.push_back({tf.require<double>("coefficient"), label_filter_from_string(tf.get<std::string>("label", "any")),
                         tf.get<std::string>("group", "")});
      }
      s = RateConstraintSpec::custom(f.require<std::string>("name"), std::move(terms), f.get<double>("constant", 0.0));
      break;
    }
  }
  if (kind != ConstraintKind::kCustom && f.has("name")) s.name = f.require<std::string>("name");
  return s;
}

std::vector<SolverConfig> parse_solver(const json& j) {
  Fields f(j, "solvers[]", {"algorithm", "mode", "modes", "iterations", "inner_iterations", "eta_theta",
                            "eta_lambda", "theoretical_eta_lambda", "covering_radius", "oracle_tolerance",
                            "oracle_max_steps", "cache_oracle", "mu", "theta_radius", "lambda_radius",
                            "batch_size", "snapshots", "warm_start_stationary"});
  SolverConfig c;
  c.algorithm = algorithm_from_string(f.require<std::string>("algorithm"));
  c.iterations = f.get<Index>("iterations", c.iterations);
  c.inner_iterations = f.get<Index>("inner_iterations", c.inner_iterations);
  c.adam.step_size = f.get<double>("eta_theta", c.adam.step_size);
  c.eta_lambda = f.get<double>("eta_lambda", c.eta_lambda);
  c.theoretical_eta_lambda = f.get<bool>("theoretical_eta_lambda", false);
  c.covering_radius = f.get<double>("covering_radius", c.covering_radius);
  c.oracle.tolerance = f.get<double>("oracle_tolerance", c.oracle.tolerance);
  c.oracle.max_steps = f.get<int>("oracle_max_steps", c.oracle.max_steps);
  c.cache_oracle = f.get<bool>("cache_oracle", true);
  c.mu = f.get<double>("mu", c.mu);
  c.theta_radius = f.get<double>("theta_radius", c.theta_radius);
  c.lambda_radius = f.get<double>("lambda_radius", c.lambda_radius);
  c.batch_size = f.get<Index>("batch_size", c.batch_size);
  c.num_snapshots = f.get<Index>("snapshots", c.num_snapshots);
  c.warm_start_stationary = f.get<bool>("warm_start_stationary", false);
  std::vector<std::string> modes;
  if (f.has("modes")) modes = f.require<std::vector<std::string>>("modes");
  if (f.has("mode")) modes.push_back(f.require<std::string>("mode"));
  if (modes.empty()) modes = {"two_dataset"};
  std::vector<SolverConfig> out;
  for (const auto& m : modes) {
    SolverConfig copy = c;
    copy.mode = dataset_mode_from_string(m);
    out.push_back(copy);
  }
  return out;
}

json solver_to_json(const SolverConfig& c) {
  json j;
  j["algorithm"] = to_string(c.algorithm);
  j["mode"] = to_string(c.mode);
  j["iterations"] = c.iterations;
  j["inner_iterations"] = c.inner_iterations;
  j["eta_theta"] = c.adam.step_size;
  j["eta_lambda"] = c.eta_lambda;
  j["theoretical_eta_lambda"] = c.theoretical_eta_lambda;
  j["covering_radius"] = c.covering_radius;
  j["oracle_tolerance"] = c.oracle.tolerance;
  j["oracle_max_steps"] = c.oracle.max_steps;
  j["cache_oracle"] = c.cache_oracle;
  j["mu"] = c.mu;
  if (std::isfinite(c.theta_radius)) j["theta_radius"] = c.theta_radius;
  j["lambda_radius"] = c.lambda_radius;
  j["batch_size"] = c.batch_size;
  j["snapshots"] = c.num_snapshots;
  j["warm_start_stationary"] = c.warm_start_stationary;
  return j;
}

json constraint_to_json(const RateConstraintSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == ConstraintKind::kCustom) {
    j["name"] = s.name;
    j["constant"] = s.constant;
    j["terms"] = json::array();
    for (const auto& t : s.terms) {
      j["terms"].push_back({{"coefficient", t.coefficient}, {"label", label_filter_to_string(t.label)}, {"group", t.group}});
    }
    return j;
  }
  if (!s.group.empty()) j["group"] = s.group;
  if (s.kind == ConstraintKind::kGroupFprVsOverall) {
    j["slack"] = s.threshold;
  } else {
    j["threshold"] = s.threshold;
  }
  if (!s.name.empty()) j["name"] = s.name;
  return j;
}

json dataset_to_json(const DatasetConfig& d) {
  json j;
  j["name"] = d.name;
  if (d.type == DatasetConfig::Type::kSimulated) {
    const auto& s = d.simulated;
    j["type"] = "simulated";
    j["n"] = s.n;
    j["sigma"] = s.sigma;
    j["mean_negative"] = {s.mean_negative[0], s.mean_negative[1]};
    j["mean_positive"] = {s.mean_positive[0], s.mean_positive[1]};
    j["covariance"] = {{s.covariance(0, 0), s.covariance(0, 1)}, {s.covariance(1, 0), s.covariance(1, 1)}};
    j["positive_probability"] = s.positive_probability;
    return j;
  }
  const auto& t = d.tabular;
  j["type"] = "tabular";
  j["path"] = t.path;
  if (!t.test_path.empty()) j["test_path"] = t.test_path;
  j["missing"] = t.missing_token;
  j["test_fraction"] = d.test_fraction;
  j["label"] = {{"column", t.label.column}};
  if (!t.label.positive_values.empty()) j["label"]["positive"] = t.label.positive_values;
  if (t.label.percentile_at_least) j["label"]["percentile_at_least"] = *t.label.percentile_at_least;
  j["features"] = json::array();
  for (const auto& f : t.features) {
    j["features"].push_back({{"column", f.column}, {"kind", reverse(kFeatureKinds, f.kind)}, {"buckets", f.buckets},
                             {"percentile", f.percentile}});
  }
  j["groups"] = json::array();
  for (const auto& g : t.groups) {
    j["groups"].push_back({{"name", g.name}, {"column", g.column}, {"op", reverse(kGroupOps, g.op)},
                           {"value", g.value}, {"number", g.number}});
  }
  return j;
}

// Data for one run index, shared by every solver of that run.
struct RunData {
  DatasetView train;
  DatasetView val;
  DatasetView test;
};

// The simulated draw is fixed by the base seed; runs differ in their split.
RunData prepare_run(const DatasetConfig& d, const std::optional<TabularData>& tabular, std::uint64_t base_seed,
                    std::uint64_t seed) {
  if (d.type == DatasetConfig::Type::kSimulated) {
    SimulatedSpec spec = d.simulated;
    spec.seed = derive_seed(base_seed, kDrawStream);
    spec.split_seed = derive_seed(seed, kSimSplitStream);
    auto s = generate_simulated(spec);
    return {s.train, s.val, s.test};
  }
  DatasetView pool = tabular->train;
  DatasetView test;
  if (tabular->test) {
    test = *tabular->test;
  } else {
    if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) {
      throw ContractError("tabular data without a test file needs 0 < test_fraction < 1");
    }
    std::vector<Index> order(static_cast<std::size_t>(pool.size()));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, kTestStream));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_test = static_cast<Index>(std::llround(d.test_fraction * static_cast<double>(pool.size())));
    std::vector<Index> a(order.begin(), order.begin() + n_test);
    std::vector<Index> b(order.begin() + n_test, order.end());
    test = pool.subset(a, Role::kTest);
    pool = pool.subset(b, Role::kAll);
  }
  auto halves = split(pool, SplitMode::kTwoDataset, derive_seed(seed, kValStream));
  return {halves.train, halves.val, test.with_role(Role::kTest)};
}

struct Job {
  std::size_t solver = 0;
  Index run = 0;
};

void execute_run(const ExperimentConfig& config, const SolverConfig& solver_in, const RunData& data, Index run,
                 const std::string& output_dir, RunRecord& record) {
  SolverConfig solver = solver_in;
  solver.seed = config.seed + static_cast<std::uint64_t>(run);
  record.dataset = config.dataset.name;
  record.algorithm = to_string(solver.algorithm);
  record.mode = to_string(solver.mode);
  record.run = run;
  record.seed = solver.seed;
  try {
    const ConstrainedProblem problem(config.objective, config.constraints, data.train.group_names(), config.l2);
    const Architecture arch{data.train.dim(), config.hidden_units};
    const IterateTrace trace = run_solver(problem, arch, data.train, data.val, solver);
    ShrinkInput input = trace.shrink_input();
    ShrinkInput selection = input;
    if (solver.algorithm == Algorithm::kUnconstrained) selection.constraints.resize(0, input.num_iterates());
    const ShrinkResult shrunk = shrink(selection, config.shrink);
    const auto& classifier = shrunk.classifier;

    std::vector<double> errors;
    std::vector<Eigen::VectorXd> val_c;
    std::vector<Eigen::VectorXd> theta_c;
    for (const auto& s : trace.snapshots) {
      errors.push_back(s.train_error);
      val_c.push_back(s.val_constraints);
      theta_c.push_back(s.train_constraints);
    }
    const auto on_val = combine_metrics(classifier, errors, val_c);
    const auto on_theta = combine_metrics(classifier, errors, theta_c);
    const auto models = trace.snapshot_models();
    const auto on_test = evaluate_stochastic(classifier, models, problem, data.test);

    record.train_error = on_val.error;
    record.train_violation = on_val.max_violation();
    record.theta_data_violation = on_theta.max_violation();
    record.test_error = on_test.error;
    record.test_violation = on_test.max_violation();
    record.epsilon = shrunk.epsilon;
    record.support_size = static_cast<Index>(classifier.size());

    if (!output_dir.empty()) {
      const std::string rel = (fs::path("runs") / (record.algorithm + "_" + record.mode) /
                               ("run_" + std::to_string(run))).generic_string();
      const fs::path dir = fs::path(output_dir) / rel;
      fs::create_directories(dir);
      write_trace_csv((dir / "trace.csv").string(), trace);
      write_classifier_csv((dir / "classifier.csv").string(), classifier);
      if (config.write_checkpoints) write_trace_checkpoints((dir / "checkpoints").string(), trace);
      record.artifacts = rel;
    }
    record.ok = true;
  } catch (const std::exception& e) {
    record.ok = false;
    record.reason = e.what();
    log::get().error("{} {} run {} failed: {}", record.algorithm, record.mode, run, e.what());
  }
}

std::vector<SolverConfig> effective_solvers(const ExperimentConfig& config) {
  std::vector<SolverConfig> out = config.solvers;
  if (config.include_unconstrained) {
    SolverConfig c = config.solvers.empty() ? SolverConfig{} : config.solvers.front();
    c.algorithm = Algorithm::kUnconstrained;
    c.mode = DatasetMode::kOneDataset;
    out.push_back(c);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
}

}  // namespace

RateConstraintSpec constraint_from_json(const json& j) { return parse_constraint(j); }

std::vector<SolverConfig> solvers_from_json(const json& j) { return parse_solver(j); }

void ExperimentConfig::validate() const {
  if (solvers.empty() && !include_unconstrained) throw ContractError("experiment needs at least one solver");
  if (runs < 1) throw ContractError("runs must be >= 1");
  if (workers < 1) throw ContractError("workers must be >= 1");
  if (hidden_units < 0) throw ContractError("hidden_units must be >= 0");
  if (constraints.empty()) throw ContractError("experiment needs at least one constraint");
  if (dataset.type == DatasetConfig::Type::kSimulated) {
    dataset.simulated.validate();
  } else {
    dataset.tabular.validate();
  }
  for (const auto& s : solvers) s.validate(static_cast<Index>(constraints.size()));
  for (double s : sigma_sweep) {
    if (!(s > 0.0)) throw ContractError("sigma sweep values must be positive");
  }
}

ExperimentConfig parse_experiment_config(const json& j) {
  Fields f(j, "config", {"name", "dataset", "objective", "constraints", "l2", "hidden_units", "hidden_sweep",
                         "solvers", "include_unconstrained", "runs", "seed", "sigma_sweep", "workers", "shrink",
                         "write_checkpoints"});
  ExperimentConfig c;
  c.name = f.get<std::string>("name", "experiment");
  c.dataset = parse_dataset(f.at("dataset"));
  c.objective.kind = objective_from_string(f.get<std::string>("objective", "error_rate"));
  for (const auto& cj : f.at("constraints")) c.constraints.push_back(parse_constraint(cj));
  c.l2 = f.get<double>("l2", 0.0);
  c.hidden_units = f.get<Index>("hidden_units", 0);
  c.hidden_sweep = f.get<std::vector<Index>>("hidden_sweep", {});
  if (f.has("solvers")) {
    for (const auto& sj : f.at("solvers")) {
      for (auto& s : parse_solver(sj)) c.solvers.push_back(std::move(s));
    }
  }
  c.include_unconstrained = f.get<bool>("include_unconstrained", false);
  c.runs = f.get<Index>("runs", c.dataset.type == DatasetConfig::Type::kTabular ? 100 : 10);
  c.seed = f.get<std::uint64_t>("seed", 0);
  c.sigma_sweep = f.get<std::vector<double>>("sigma_sweep", {});
  c.workers = f.get<int>("workers", 1);
  if (f.has("shrink")) {
    Fields sf(f.at("shrink"), "config.shrink", {"tolerance", "max_bisections", "allow_negative_epsilon"});
    c.shrink.tolerance = sf.get<double>("tolerance", c.shrink.tolerance);
    c.shrink.max_bisections = sf.get<int>("max_bisections", c.shrink.max_bisections);
    c.shrink.allow_negative_epsilon = sf.get<bool>("allow_negative_epsilon", false);
  }
  c.write_checkpoints = f.get<bool>("write_checkpoints", false);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["dataset"] = dataset_to_json(c.dataset);
  j["objective"] = objective_to_string(c.objective.kind);
  j["constraints"] = json::array();
  for (const auto& s : c.constraints) j["constraints"].push_back(constraint_to_json(s));
  j["l2"] = c.l2;
  j["hidden_units"] = c.hidden_units;
  if (!c.hidden_sweep.empty()) j["hidden_sweep"] = c.hidden_sweep;
  j["solvers"] = json::array();
  for (const auto& s : c.solvers) j["solvers"].push_back(solver_to_json(s));
  j["include_unconstrained"] = c.include_unconstrained;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  if (!c.sigma_sweep.empty()) j["sigma_sweep"] = c.sigma_sweep;
  j["workers"] = c.workers;
  j["shrink"] = {{"tolerance", c.shrink.tolerance},
                 {"max_bisections", c.shrink.max_bisections},
                 {"allow_negative_epsilon", c.shrink.allow_negative_epsilon}};
  j["write_checkpoints"] = c.write_checkpoints;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& output_dir, int workers) {
  config.validate();
  const auto solvers = effective_solvers(config);
  std::optional<TabularData> tabular;
  if (config.dataset.type == DatasetConfig::Type::kTabular) tabular = load_tabular(config.dataset.tabular);

  std::vector<RunData> data;
  std::vector<std::string> data_errors;
  for (Index r = 0; r < config.runs; ++r) {
    try {
      data.push_back(prepare_run(config.dataset, tabular, config.seed, config.seed + static_cast<std::uint64_t>(r)));
      data_errors.emplace_back();
    } catch (const std::exception& e) {
      data.emplace_back();
      data_errors.emplace_back(e.what());
    }
  }

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    for (Index r = 0; r < config.runs; ++r) jobs.push_back({s, r});
  }
  ExperimentResult result;
  result.records.resize(jobs.size());
  if (!output_dir.empty()) fs::create_directories(output_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      RunRecord& rec = result.records[k];
      if (!data_errors[job.run].empty()) {
        rec.dataset = config.dataset.name;
        rec.algorithm = to_string(solvers[job.solver].algorithm);
        rec.mode = to_string(solvers[job.solver].mode);
        rec.run = job.run;
        rec.seed = config.seed + static_cast<std::uint64_t>(job.run);
        rec.reason = data_errors[job.run];
        continue;
      }
      execute_run(config, solvers[job.solver], data[job.run], job.run, output_dir, rec);
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& r : result.records) result.all_completed = result.all_completed && r.ok;
  result.rows = aggregate(result.records);
  result.summary = compare_generalization(result.rows);
  if (!output_dir.empty()) {
    write_runs_csv((fs::path(output_dir) / "runs.csv").string(), result.records);
    write_report_csv((fs::path(output_dir) / "report.csv").string(), result.rows);
    write_text((fs::path(output_dir) / "summary.json").string(), summary_json(config, result).dump(2) + "\n");
  }
  return result;
}

std::vector<ReportRow> aggregate(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    Key key{r.dataset, r.algorithm, r.mode};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<ReportRow> rows;
  for (const auto& key : order) {
    const auto& members = groups[key];
    std::vector<double> tr_e, tr_v, te_e, te_v, g1, g2;
    for (const auto* r : members) {
      if (!r->ok) continue;
      tr_e.push_back(r->train_error);
      tr_v.push_back(r->train_violation);
      te_e.push_back(r->test_error);
      te_v.push_back(r->test_violation);
      g1.push_back(r->train_violation - r->theta_data_violation);
      g2.push_back(r->test_violation - r->train_violation);
    }
    for (const char* split : {"train", "test"}) {
      ReportRow row;
      std::tie(row.dataset, row.algorithm, row.mode) = key;
      row.split = split;
      const bool train = row.split == "train";
      row.error_mean = mean_of(train ? tr_e : te_e);
      row.error_std = std_of(train ? tr_e : te_e);
      row.violation_mean = mean_of(train ? tr_v : te_v);
      row.violation_std = std_of(train ? tr_v : te_v);
      row.completed = static_cast<Index>(tr_e.size());
      row.attempted = static_cast<Index>(members.size());
      row.gap_val_minus_train = mean_of(g1);
      row.gap_test_minus_val = mean_of(g2);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<GeneralizationSummary> compare_generalization(const std::vector<ReportRow>& rows) {
  std::vector<GeneralizationSummary> out;
  auto find = [&](const std::string& d, const std::string& a, const std::string& m, const std::string& s) {
    for (const auto& r : rows) {
      if (r.dataset == d && r.algorithm == a && r.mode == m && r.split == s) return &r;
    }
    return static_cast<const ReportRow*>(nullptr);
  };
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : rows) {
    if (!seen.insert({r.dataset, r.algorithm}).second) continue;
    const auto* one_test = find(r.dataset, r.algorithm, "one_dataset", "test");
    const auto* two_test = find(r.dataset, r.algorithm, "two_dataset", "test");
    const auto* one_train = find(r.dataset, r.algorithm, "one_dataset", "train");
    const auto* two_train = find(r.dataset, r.algorithm, "two_dataset", "train");
    if (!one_test || !two_test) continue;
    GeneralizationSummary s;
    s.dataset = r.dataset;
    s.algorithm = r.algorithm;
    s.one_dataset_test_violation = one_test->violation_mean;
    s.two_dataset_test_violation = two_test->violation_mean;
    s.gap = s.one_dataset_test_violation - s.two_dataset_test_violation;
    s.one_dataset_spread = one_test->violation_mean - one_train->violation_mean;
    s.two_dataset_spread = two_test->violation_mean - two_train->violation_mean;
    s.effect_sign = s.gap > 0.0 ? 1 : (s.gap < 0.0 ? -1 : 0);
    out.push_back(s);
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::string& output_dir, int workers) {
  if (config.dataset.type != DatasetConfig::Type::kSimulated) throw ContractError("sweeps need simulated data");
  if (config.sigma_sweep.empty()) throw ContractError("sweep needs a nonempty sigma_sweep");
  const std::vector<Index> hidden = config.hidden_sweep.empty() ? std::vector<Index>{config.hidden_units}
                                                                 : config.hidden_sweep;
  SweepResult out;
  for (double sigma : config.sigma_sweep) {
    for (Index h : hidden) {
      ExperimentConfig c = config;
      c.dataset.simulated.sigma = sigma;
      c.hidden_units = h;
      std::string sub;
      if (!output_dir.empty()) {
        sub = (fs::path(output_dir) / ("sigma_" + tag(sigma) + "_h" + std::to_string(h))).string();
      }
      const auto res = run_experiment(c, sub, workers);
      out.all_completed = out.all_completed && res.all_completed;
      for (const auto& row : res.rows) out.rows.push_back({sigma, h, row});
    }
  }
  if (!output_dir.empty()) write_sweep_csv((fs::path(output_dir) / "sweep.csv").string(), out.rows);
  return out;
}

void write_runs_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "dataset,algorithm,mode,run,seed,ok,reason,train_error,train_violation,theta_data_violation,"
         "test_error,test_violation,epsilon,support_size,artifacts\n";
  for (const auto& r : records) {
    out << csv_escape(r.dataset) << "," << r.algorithm << "," << r.mode << "," << r.run << "," << r.seed << ","
        << (r.ok ? 1 : 0) << "," << csv_escape(r.reason) << "," << fmt(r.train_error) << ","
        << fmt(r.train_violation) << "," << fmt(r.theta_data_violation) << "," << fmt(r.test_error) << ","
        << fmt(r.test_violation) << "," << fmt(r.epsilon) << "," << r.support_size << "," << csv_escape(r.artifacts)
        << "\n";
  }
  write_text(path, out.str());
}

std::vector<RunRecord> read_runs_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  auto col = [&](const char* name) {
    const Index c = table.column(name);
    if (c < 0) throw ParseError(path + ": missing column " + name);
    return c;
  };
  const Index c_dataset = col("dataset"), c_alg = col("algorithm"), c_mode = col("mode"), c_run = col("run"),
              c_seed = col("seed"), c_ok = col("ok"), c_reason = col("reason"), c_tre = col("train_error"),
              c_trv = col("train_violation"), c_thv = col("theta_data_violation"), c_tee = col("test_error"),
              c_tev = col("test_violation"), c_eps = col("epsilon"), c_sup = col("support_size"),
              c_art = col("artifacts");
  std::vector<RunRecord> out;
  for (const auto& row : table.rows) {
    RunRecord r;
    try {
      r.dataset = row[c_dataset];
      r.algorithm = row[c_alg];
      r.mode = row[c_mode];
      r.run = std::stoll(row[c_run]);
      r.seed = std::stoull(row[c_seed]);
      r.ok = row[c_ok] == "1";
      r.reason = row[c_reason];
      r.train_error = std::stod(row[c_tre]);
      r.train_violation = std::stod(row[c_trv]);
      r.theta_data_violation = std::stod(row[c_thv]);
      r.test_error = std::stod(row[c_tee]);
      r.test_violation = std::stod(row[c_tev]);
      r.epsilon = std::stod(row[c_eps]);
      r.support_size = std::stoll(row[c_sup]);
      r.artifacts = row[c_art];
    } catch (const std::exception&) {
      throw ParseError(path + ": malformed run row");
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

void put_report_row(std::ostringstream& out, const ReportRow& r) {
  out << csv_escape(r.dataset) << "," << r.algorithm << "," << r.mode << "," << r.split << "," << fmt(r.error_mean)
      << "," << fmt(r.error_std) << "," << fmt(r.violation_mean) << "," << fmt(r.violation_std) << "," << r.completed
      << "," << r.attempted << "," << fmt(r.gap_val_minus_train) << "," << fmt(r.gap_test_minus_val);
}

constexpr const char* kReportHeader =
    "dataset,algorithm,mode,split,error_mean,error_std,violation_mean,violation_std,completed,attempted,"
    "gap_val_minus_train,gap_test_minus_val";

}  // namespace

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << kReportHeader << "\n";
  for (const auto& r : rows) {
    put_report_row(out, r);
    out << "\n";
  }
  write_text(path, out.str());
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "sigma,hidden_units," << kReportHeader << "\n";
  for (const auto& r : rows) {
    out << fmt(r.sigma) << "," << r.hidden_units << ",";
    put_report_row(out, r.row);
    out << "\n";
  }
  write_text(path, out.str());
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json j;
  j["config"] = to_json(config);
  j["all_completed"] = result.all_completed;
  Index completed = 0;
  for (const auto& r : result.records) completed += r.ok ? 1 : 0;
  j["runs_completed"] = completed;
  j["runs_attempted"] = result.records.size();
  j["rows"] = json::array();
  for (const auto& r : result.rows) {
    j["rows"].push_back({{"dataset", r.dataset}, {"algorithm", r.algorithm}, {"mode", r.mode}, {"split", r.split},
                         {"error_mean", r.error_mean}, {"error_std", r.error_std},
                         {"violation_mean", r.violation_mean}, {"violation_std", r.violation_std},
                         {"completed", r.completed}, {"attempted", r.attempted},
                         {"gap_val_minus_train", r.gap_val_minus_train},
                         {"gap_test_minus_val", r.gap_test_minus_val}});
  }
  j["generalization"] = json::array();
  for (const auto& s : result.summary) {
    j["generalization"].push_back({{"dataset", s.dataset}, {"algorithm", s.algorithm},
                                   {"one_dataset_test_violation", s.one_dataset_test_violation},
                                   {"two_dataset_test_violation", s.two_dataset_test_violation}, {"gap", s.gap},
                                   {"one_dataset_spread", s.one_dataset_spread},
                                   {"two_dataset_spread", s.two_dataset_spread}, {"effect_sign", s.effect_sign}});
  }
  j["failures"] = json::array();
  for (const auto& r : result.records) {
    if (!r.ok) {
      j["failures"].push_back({{"algorithm", r.algorithm}, {"mode", r.mode}, {"run", r.run}, {"reason", r.reason}});
    }
  }
  return j;
}

std::string format_table(const std::vector<ReportRow>& rows) {
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::string>> lines;
  for (const auto& r : rows) {
    const std::string col = r.algorithm + "/" + r.mode;
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    const std::pair<std::string, std::string> line{r.dataset, r.split};
    if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(line);
  }
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-20s %-6s", "dataset", "split");
  out << buf;
  for (const auto& c : columns) {
    std::snprintf(buf, sizeof buf, " | %-30s", c.c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& [dataset, split] : lines) {
    std::snprintf(buf, sizeof buf, "%-20s %-6s", dataset.c_str(), split.c_str());
    out << buf;
    for (const auto& c : columns) {
      const ReportRow* hit = nullptr;
      for (const auto& r : rows) {
        if (r.dataset == dataset && r.split == split && r.algorithm + "/" + r.mode == c) hit = &r;
      }
      if (hit) {
        std::snprintf(buf, sizeof buf, " | err %.4f  viol %+.4f      ", hit->error_mean, hit->violation_mean);
      } else {
        std::snprintf(buf, sizeof buf, " | %-30s", "-");
      }
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ratecon
