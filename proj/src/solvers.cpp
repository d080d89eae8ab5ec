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
#include "ratecon/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ratecon/covering.hpp"
#include "ratecon/error.hpp"
#include "ratecon/log.hpp"
#include "ratecon/random.hpp"
#include "ratecon/subgradient.hpp"

namespace ratecon {

namespace {

constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kLambdaStream = 2;
constexpr std::uint64_t kInitStream = 3;

// The data each player sees.
struct PlayerData {
  DatasetView theta;
  DatasetView lambda;
  bool shared = false;
};

PlayerData player_data(const DatasetView& train, const DatasetView& val, DatasetMode mode) {
  if (mode == DatasetMode::kTwoDataset) return {train, val, false};
  DatasetView all = DatasetView::concat(train, val, Role::kTrain);
  return {all, all, true};
}

bool has_empty_term(const ConstrainedProblem& problem, const DatasetView& batch) {
  for (const auto& c : problem.compiled()) {
    for (const auto& term : c.terms) {
      bool found = false;
      for (Index k = 0; k < batch.size() && !found; ++k) {
        const double y = batch.label(k);
        if (term.label == LabelFilter::kPositive && y <= 0.0) continue;
        if (term.label == LabelFilter::kNegative && y > 0.0) continue;
        found = term.group < 0 || batch.in_group(k, term.group);
      }
      if (!found) return true;
    }
  }
  return false;
}

Model initial_model(const Architecture& arch, std::uint64_t seed) {
  if (arch.is_linear()) return Model(arch);
  return Model::random_init(arch, derive_seed(seed, kInitStream));
}

// Snapshot bookkeeping shared by every solver.
class Recorder {
 public:
  Recorder(const ConstrainedProblem& problem, const PlayerData& data, const SolverConfig& config)
      : problem_(problem), data_(data) {
    const auto schedule = snapshot_schedule(config.iterations, config.num_snapshots);
    wanted_.insert(schedule.begin(), schedule.end());
  }

  void maybe_record(IterateTrace& trace, Index t, const Model& model, const Eigen::VectorXd& lambda,
                    double lambda_objective_weight) {
    if (!wanted_.count(t)) return;
    IterateSnapshot s;
    s.t = t;
    s.model = model;
    s.lambda = lambda;
    s.lambda_objective_weight = lambda_objective_weight;
    const Eigen::VectorXd f = model.predict(data_.theta);
    s.train_error = margins::objective_error(problem_, f, data_.theta);
    s.train_objective = eval_objective(problem_, model, data_.theta, true);
    s.train_constraints = margins::constraint_values(problem_, f, data_.theta);
    s.val_constraints = data_.shared ? s.train_constraints : eval_constraints(problem_, model, data_.lambda);
    trace.snapshots.push_back(std::move(s));
  }

 private:
  const ConstrainedProblem& problem_;
  const PlayerData& data_;
  std::set<Index> wanted_;
};

void check_problem(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                   const DatasetView& val) {
  if (train.empty() || val.empty()) throw ContractError("train and val must be nonempty");
  if (train.dim() != arch.input_dim || val.dim() != arch.input_dim) {
    throw SchemaError("data dimension does not match the architecture");
  }
  if (train.num_groups() != val.num_groups()) throw SchemaError("train and val have different group schemas");
  (void)problem;
}

void note_payoff(IterateTrace& trace, const Eigen::VectorXd& lambda, const Eigen::VectorXd& g) {
  trace.lambdas.push_back(lambda);
  trace.payoffs.push_back(g);
  if (g.size() > 0) trace.payoff_bound = std::max(trace.payoff_bound, g.cwiseAbs().maxCoeff());
}

double swap_step(const ConstrainedProblem& problem, const SolverConfig& config) {
  if (!config.theoretical_eta_lambda) return config.eta_lambda;
  return theoretical_swap_step(payoff_bound(problem), problem.num_constraints() + 1, config.iterations);
}

DifferentiableObjective l_theta_objective(const ConstrainedProblem& problem, const Architecture& arch,
                                          const Eigen::VectorXd& lambda, const DatasetView& data) {
  const LossWeights weights = LossWeights::from_simplex(lambda, 1e-6);
  return [&problem, arch, weights, &data](const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) {
    const Model model(arch, theta);
    auto s = weighted_subgradient(problem, model, weights, data, EmptyGroupPolicy::kThrow);
    if (!std::isfinite(s.value)) throw NumericError("non-finite loss in oracle");
    if (gradient) *gradient = std::move(s.gradient);
    return s.value;
  };
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDiscrete: return "discrete";
    case Algorithm::kContinuous: return "continuous";
    case Algorithm::kPractical: return "practical";
    case Algorithm::kLagrangianPractical: return "lagrangian_practical";
    case Algorithm::kUnconstrained: return "unconstrained";
  }
  return "?";
}

const char* to_string(DatasetMode mode) {
  return mode == DatasetMode::kTwoDataset ? "two_dataset" : "one_dataset";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::kDiscrete, Algorithm::kContinuous, Algorithm::kPractical,
                 Algorithm::kLagrangianPractical, Algorithm::kUnconstrained}) {
    if (name == to_string(a)) return a;
  }
  throw ParseError("unknown algorithm '" + name + "'");
}

DatasetMode dataset_mode_from_string(const std::string& name) {
  if (name == "two_dataset") return DatasetMode::kTwoDataset;
  if (name == "one_dataset") return DatasetMode::kOneDataset;
  throw ParseError("unknown dataset mode '" + name + "'");
}

void SolverConfig::validate(Index num_constraints) const {
  if (iterations < 1) throw ContractError("iterations must be positive");
  if (num_snapshots < 1) throw ContractError("snapshot count must be positive");
  if (batch_size < 1) throw ContractError("batch size must be positive");
  if (!(adam.step_size > 0.0)) throw ContractError("eta_theta must be positive");
  if (!(eta_lambda > 0.0)) throw ContractError("eta_lambda must be positive");
  if (!(theta_radius > 0.0)) throw ContractError("theta radius must be positive");
  if (mu < 0.0) throw ContractError("mu must be nonnegative");
  if (algorithm != Algorithm::kUnconstrained && num_constraints < 1) {
    throw ContractError("constrained solvers need at least one constraint");
  }
  if (algorithm == Algorithm::kDiscrete) {
    if (!(covering_radius > 0.0)) throw ContractError("covering radius must be positive");
    if (!(oracle.tolerance > 0.0) || oracle.max_steps < 1) throw ContractError("invalid oracle options");
  }
  if (algorithm == Algorithm::kContinuous) {
    if (!(mu > 0.0)) throw ContractError("the continuous solver needs mu > 0");
    if (!std::isfinite(theta_radius)) throw ContractError("the continuous solver needs a finite theta radius");
    if (inner_iterations < 1) throw ContractError("inner iterations must be positive");
  }
}

ShrinkInput IterateTrace::shrink_input() const {
  ShrinkInput in;
  const auto t = static_cast<Index>(snapshots.size());
  const Index m = t > 0 ? snapshots.front().val_constraints.size() : 0;
  in.objective.resize(t);
  in.constraints.resize(m, t);
  for (Index i = 0; i < t; ++i) {
    in.objective[i] = snapshots[i].train_error;
    if (m > 0) in.constraints.col(i) = snapshots[i].val_constraints;
  }
  return in;
}

std::vector<Model> IterateTrace::snapshot_models() const {
  std::vector<Model> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(s.model);
  return out;
}

double IterateTrace::best_feasibility_margin() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : snapshots) best = std::max(best, -max_violation(s.val_constraints));
  return best;
}

double IterateTrace::mean_lambda_objective_weight() const {
  if (snapshots.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : snapshots) total += s.lambda_objective_weight;
  return total / static_cast<double>(snapshots.size());
}

std::vector<Index> snapshot_schedule(Index iterations, Index count) {
  if (iterations < 1 || count < 1) throw ContractError("schedule needs positive iterations and count");
  std::vector<Index> out;
  if (count >= iterations) {
    for (Index t = 0; t < iterations; ++t) out.push_back(t);
    return out;
  }
  if (count == 1) return {iterations - 1};
  for (Index k = 0; k < count; ++k) {
    const auto t = static_cast<Index>(std::llround(static_cast<double>(k) * static_cast<double>(iterations - 1) /
                                                   static_cast<double>(count - 1)));
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

double payoff_bound(const ConstrainedProblem& problem) {
  double bound = 0.0;
  for (const auto& c : problem.compiled()) {
    double b = std::abs(c.constant);
    for (const auto& term : c.terms) b += std::abs(term.coefficient);
    bound = std::max(bound, b);
  }
  return bound;
}

OracleResult minimize_deterministic(const DifferentiableObjective& objective, Eigen::VectorXd start,
                                    const OracleOptions& options, double radius) {
  OracleResult out;
  out.theta = project_theta(start, radius);
  Eigen::VectorXd grad;
  out.value = objective(out.theta, &grad);
  if (!std::isfinite(out.value)) throw NumericError("non-finite loss at the oracle start");
  double step = options.initial_step;
  Eigen::VectorXd next_grad;
  while (out.steps < options.max_steps) {
    bool accepted = false;
    Eigen::VectorXd candidate;
    double value = 0.0;
    for (int b = 0; b <= options.max_backtracks; ++b) {
      candidate = project_theta(out.theta - step * grad, radius);
      value = objective(candidate, &next_grad);
      if (!std::isfinite(value)) throw NumericError("non-finite loss in oracle descent");
      if (value < out.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double decrease = out.value - value;
    out.theta = std::move(candidate);
    out.value = value;
    grad.swap(next_grad);
    ++out.steps;
    step = std::min(2.0 * step, options.initial_step);
    if (decrease < options.tolerance / 10.0) break;
  }
  return out;
}

Model oracle_minimize(const ConstrainedProblem& problem, const Architecture& arch, const Eigen::VectorXd& lambda,
                      const DatasetView& train, const OracleOptions& options, std::uint64_t seed, double radius) {
  if (lambda.size() != problem.num_constraints() + 1) throw ContractError("lambda must have m+1 coordinates");
  Eigen::VectorXd start;
  if (arch.is_linear()) {
    start = Eigen::VectorXd::Zero(arch.num_params());
  } else {
    std::uint64_t key = seed;
    for (Index i = 0; i < lambda.size(); ++i) {
      key = derive_seed(key, static_cast<std::uint64_t>(std::llround(lambda[i] * 1e12)));
    }
    start = Model::random_init(arch, key).params();
  }
  auto result = minimize_deterministic(l_theta_objective(problem, arch, lambda, train), std::move(start), options,
                                       radius);
  return Model(arch, std::move(result.theta));
}

InnerDescentResult strongly_convex_descent(const DifferentiableObjective& objective, Index dim, double mu,
                                           Index iterations, double radius) {
  if (!(mu > 0.0) || iterations < 1 || dim < 1) throw ContractError("inner descent needs mu > 0, T >= 1, dim >= 1");
  InnerDescentResult out;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad;
  for (Index s = 1; s <= iterations; ++s) {
    sum += theta;
    const double value = objective(theta, &grad);
    if (!std::isfinite(value) || !grad.allFinite()) throw NumericError("non-finite loss in inner descent");
    out.max_gradient_norm = std::max(out.max_gradient_norm, grad.norm());
    theta = project_theta(theta - grad / (mu * static_cast<double>(s)), radius);
  }
  out.average = sum / static_cast<double>(iterations);
  return out;
}

IterateTrace run_discrete(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                          const DatasetView& val, const SolverConfig& config) {
  config.validate(problem.num_constraints());
  check_problem(problem, arch, train, val);
  const PlayerData data = player_data(train, val, config.mode);
  const Index m = problem.num_constraints();
  const Covering covering = build_covering(m, config.covering_radius);

  IterateTrace trace;
  trace.algorithm = Algorithm::kDiscrete;
  trace.mode = config.mode;
  trace.iterations = config.iterations;
  trace.eta_lambda = swap_step(problem, config);
  Recorder recorder(problem, data, config);

  SwapMatrix swap = SwapMatrix::uniform(m + 1);
  std::map<std::size_t, Model> cache;
  Eigen::VectorXd lambda;
  for (Index t = 0; t < config.iterations; ++t) {
    StationaryOptions so;
    if (config.warm_start_stationary && lambda.size() > 0) so.warm_start = &lambda;
    lambda = stationary_distribution(swap, so);
    const auto [index, center] = nearest_center(covering, lambda);
    Model model;
    auto it = config.cache_oracle ? cache.find(index) : cache.end();
    if (it != cache.end()) {
      model = it->second;
    } else {
      model = oracle_minimize(problem, arch, *center, data.theta, config.oracle, config.seed, config.theta_radius);
      ++trace.oracle_calls;
      if (config.cache_oracle) cache.emplace(index, model);
    }
    const Eigen::VectorXd g = lambda_gradient(problem, model, data.lambda);
    if (config.observer) config.observer({t, &data.theta, &data.lambda, &lambda, &g});
    recorder.maybe_record(trace, t, model, lambda, lambda[0]);
    note_payoff(trace, lambda, g);
    swap = swap_update(swap, lambda, g, trace.eta_lambda);
  }
  return trace;
}

IterateTrace run_continuous(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                            const DatasetView& val, const SolverConfig& config) {
  config.validate(problem.num_constraints());
  check_problem(problem, arch, train, val);
  if (!arch.is_linear()) throw ContractError("the continuous solver needs a linear model");
  ConstrainedProblem convex = problem;
  convex.set_l2(config.mu);
  const PlayerData data = player_data(train, val, config.mode);
  const Index m = problem.num_constraints();

  IterateTrace trace;
  trace.algorithm = Algorithm::kContinuous;
  trace.mode = config.mode;
  trace.iterations = config.iterations;
  trace.eta_lambda = swap_step(problem, config);
  Recorder recorder(convex, data, config);

  SwapMatrix swap = SwapMatrix::uniform(m + 1);
  Eigen::VectorXd lambda;
  for (Index t = 0; t < config.iterations; ++t) {
    StationaryOptions so;
    if (config.warm_start_stationary && lambda.size() > 0) so.warm_start = &lambda;
    lambda = stationary_distribution(swap, so);
    auto inner = strongly_convex_descent(l_theta_objective(convex, arch, lambda, data.theta), arch.num_params(),
                                         config.mu, config.inner_iterations, config.theta_radius);
    const Model model(arch, std::move(inner.average));
    const Eigen::VectorXd g = lambda_gradient(convex, model, data.lambda);
    if (config.observer) config.observer({t, &data.theta, &data.lambda, &lambda, &g});
    recorder.maybe_record(trace, t, model, lambda, lambda[0]);
    note_payoff(trace, lambda, g);
    swap = swap_update(swap, lambda, g, trace.eta_lambda);
  }
  return trace;
}

IterateTrace run_practical(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                           const DatasetView& val, const SolverConfig& config) {
  config.validate(problem.num_constraints());
  check_problem(problem, arch, train, val);
  const PlayerData data = player_data(train, val, config.mode);
  const Index m = problem.num_constraints();

  IterateTrace trace;
  trace.algorithm = Algorithm::kPractical;
  trace.mode = config.mode;
  trace.iterations = config.iterations;
  trace.eta_lambda = config.eta_lambda;
  Recorder recorder(problem, data, config);

  MinibatchStream theta_stream(data.theta.size(), config.batch_size, derive_seed(config.seed, kThetaStream));
  MinibatchStream lambda_stream(data.lambda.size(), config.batch_size, derive_seed(config.seed, kLambdaStream));
  Model model = initial_model(arch, config.seed);
  AdamState adam(model.num_params(), config.adam);
  SwapMatrix swap = SwapMatrix::uniform(m + 1);
  Eigen::VectorXd lambda;
  for (Index t = 0; t < config.iterations; ++t) {
    StationaryOptions so;
    if (config.warm_start_stationary && lambda.size() > 0) so.warm_start = &lambda;
    lambda = stationary_distribution(swap, so);
    const DatasetView theta_batch = data.theta.subset(theta_stream.next());
    const DatasetView lambda_batch = data.shared ? theta_batch : data.lambda.subset(lambda_stream.next());
    if (has_empty_term(problem, lambda_batch)) ++trace.skipped_constraint_steps;

    const Eigen::VectorXd g = lambda_gradient(problem, model, lambda_batch, EmptyGroupPolicy::kSkip);
    if (config.observer) config.observer({t, &theta_batch, &lambda_batch, &lambda, &g});
    recorder.maybe_record(trace, t, model, lambda, lambda[0]);
    note_payoff(trace, lambda, g);

    const auto step = weighted_subgradient(problem, model, LossWeights::from_simplex(lambda), theta_batch);
    adam_step(adam, model.mutable_params(), step.gradient);
    model.mutable_params() = project_theta(model.params(), config.theta_radius);
    swap = swap_update(swap, lambda, g, trace.eta_lambda);
  }
  return trace;
}

IterateTrace run_lagrangian_practical(const ConstrainedProblem& problem, const Architecture& arch,
                                      const DatasetView& train, const DatasetView& val, const SolverConfig& config) {
  config.validate(problem.num_constraints());
  check_problem(problem, arch, train, val);
  const PlayerData data = player_data(train, val, config.mode);
  const Index m = problem.num_constraints();
  const double radius = config.lambda_radius > 0.0 ? config.lambda_radius : 10.0 * static_cast<double>(m);

  IterateTrace trace;
  trace.algorithm = Algorithm::kLagrangianPractical;
  trace.mode = config.mode;
  trace.regime = MultiplierRegime::kLagrangian;
  trace.iterations = config.iterations;
  trace.eta_lambda = config.eta_lambda;
  Recorder recorder(problem, data, config);

  MinibatchStream theta_stream(data.theta.size(), config.batch_size, derive_seed(config.seed, kThetaStream));
  MinibatchStream lambda_stream(data.lambda.size(), config.batch_size, derive_seed(config.seed, kLambdaStream));
  Model model = initial_model(arch, config.seed);
  AdamState adam(model.num_params(), config.adam);
  Multipliers lambda{MultiplierRegime::kLagrangian, Eigen::VectorXd::Zero(m), radius};
  for (Index t = 0; t < config.iterations; ++t) {
    const DatasetView theta_batch = data.theta.subset(theta_stream.next());
    const DatasetView lambda_batch = data.shared ? theta_batch : data.lambda.subset(lambda_stream.next());
    if (has_empty_term(problem, lambda_batch)) ++trace.skipped_constraint_steps;

    const Eigen::VectorXd c = eval_constraints(problem, model, lambda_batch, EmptyGroupPolicy::kSkip);
    if (config.observer) config.observer({t, &theta_batch, &lambda_batch, &lambda.values, &c});
    recorder.maybe_record(trace, t, model, lambda.values, 1.0);
    note_payoff(trace, lambda.values, c);

    const auto step = weighted_subgradient(problem, model, LossWeights::from_lagrangian(lambda.values), theta_batch);
    adam_step(adam, model.mutable_params(), step.gradient);
    model.mutable_params() = project_theta(model.params(), config.theta_radius);
    lambda = projected_ascent_update(lambda, c, trace.eta_lambda, radius);
  }
  return trace;
}

IterateTrace run_unconstrained(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                               const DatasetView& val, const SolverConfig& config) {
  config.validate(problem.num_constraints());
  check_problem(problem, arch, train, val);
  const PlayerData data = player_data(train, val, config.mode);
  const Index m = problem.num_constraints();

  IterateTrace trace;
  trace.algorithm = Algorithm::kUnconstrained;
  trace.mode = config.mode;
  trace.regime = MultiplierRegime::kLagrangian;
  trace.iterations = config.iterations;
  Recorder recorder(problem, data, config);

  MinibatchStream theta_stream(data.theta.size(), config.batch_size, derive_seed(config.seed, kThetaStream));
  Model model = initial_model(arch, config.seed);
  AdamState adam(model.num_params(), config.adam);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(m);
  const LossWeights weights{1.0, zeros};
  for (Index t = 0; t < config.iterations; ++t) {
    const DatasetView theta_batch = data.theta.subset(theta_stream.next());
    if (config.observer) config.observer({t, &theta_batch, nullptr, &zeros, nullptr});
    recorder.maybe_record(trace, t, model, zeros, 1.0);
    const auto step = weighted_subgradient(problem, model, weights, theta_batch);
    adam_step(adam, model.mutable_params(), step.gradient);
    model.mutable_params() = project_theta(model.params(), config.theta_radius);
  }
  return trace;
}

IterateTrace run_solver(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                        const DatasetView& val, const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kDiscrete: return run_discrete(problem, arch, train, val, config);
    case Algorithm::kContinuous: return run_continuous(problem, arch, train, val, config);
    case Algorithm::kPractical: return run_practical(problem, arch, train, val, config);
    case Algorithm::kLagrangianPractical: return run_lagrangian_practical(problem, arch, train, val, config);
    case Algorithm::kUnconstrained: return run_unconstrained(problem, arch, train, val, config);
  }
  throw ContractError("unknown algorithm");
}

StochasticClassifier build_weighted_stochastic_classifier(const IterateTrace& trace) {
  if (trace.snapshots.empty()) throw ContractError("trace has no stored iterates");
  StochasticClassifier out;
  double total = 0.0;
  const bool proxy = trace.regime == MultiplierRegime::kProxySimplex;
  for (const auto& s : trace.snapshots) total += proxy ? std::max(0.0, s.lambda_objective_weight) : 1.0;
  const bool uniform = !(total > 0.0);
  const double n = static_cast<double>(trace.snapshots.size());
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
    const double w = uniform ? 1.0 / n
                             : (proxy ? std::max(0.0, trace.snapshots[i].lambda_objective_weight) : 1.0) / total;
    if (w <= 0.0) continue;
    out.support.push_back(static_cast<Index>(i));
    out.probabilities.push_back(w);
  }
  return out;
}

void write_trace_csv(const std::string& path, const IterateTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  const Index lambda_dim = trace.snapshots.empty() ? 0 : trace.snapshots.front().lambda.size();
  const Index m = trace.snapshots.empty() ? 0 : trace.snapshots.front().val_constraints.size();
  out << "t";
  for (Index i = 0; i < lambda_dim; ++i) out << ",lambda_" << i;
  out << ",train_error,train_objective";
  for (Index i = 1; i <= m; ++i) out << ",train_c_" << i;
  for (Index i = 1; i <= m; ++i) out << ",val_c_" << i;
  out << "\n";
  for (const auto& s : trace.snapshots) {
    out << s.t;
    for (Index i = 0; i < lambda_dim; ++i) out << "," << format_double(s.lambda[i]);
    out << "," << format_double(s.train_error) << "," << format_double(s.train_objective);
    for (Index i = 0; i < m; ++i) out << "," << format_double(s.train_constraints[i]);
    for (Index i = 0; i < m; ++i) out << "," << format_double(s.val_constraints[i]);
    out << "\n";
  }
}

ShrinkInput read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  Index error_col = -1;
  std::vector<Index> val_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "train_error") error_col = static_cast<Index>(i);
    if (header[i].rfind("val_c_", 0) == 0) val_cols.push_back(static_cast<Index>(i));
  }
  if (header.empty() || header[0] != "t" || error_col < 0) throw ParseError("bad trace header in " + path);
  std::vector<double> errors;
  std::vector<std::vector<double>> cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw ParseError("trace row has the wrong number of cells");
    try {
      errors.push_back(std::stod(cells[error_col]));
      std::vector<double> c;
      for (auto j : val_cols) c.push_back(std::stod(cells[j]));
      cols.push_back(std::move(c));
    } catch (const std::exception&) {
      throw ParseError("bad number in trace row: " + line);
    }
  }
  ShrinkInput out;
  out.objective = Eigen::Map<Eigen::VectorXd>(errors.data(), static_cast<Index>(errors.size()));
  out.constraints.resize(static_cast<Index>(val_cols.size()), static_cast<Index>(cols.size()));
  for (std::size_t t = 0; t < cols.size(); ++t) {
    for (std::size_t i = 0; i < val_cols.size(); ++i) out.constraints(i, t) = cols[t][i];
  }
  out.validate();
  return out;
}

void write_trace_checkpoints(const std::string& directory, const IterateTrace& trace) {
  std::filesystem::create_directories(directory);
  for (const auto& s : trace.snapshots) {
    save_checkpoint((std::filesystem::path(directory) / ("theta_" + std::to_string(s.t) + ".bin")).string(), s.model);
  }
}

}  // namespace ratecon
