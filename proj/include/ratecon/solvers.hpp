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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ratecon/dataset.hpp"
#include "ratecon/game.hpp"
#include "ratecon/model.hpp"
#include "ratecon/problem.hpp"
#include "ratecon/shrinking.hpp"

namespace ratecon {

enum class Algorithm {
  kDiscrete,             // covering + deterministic oracle
  kContinuous,           // inner strongly convex descent, outer swap-regret player
  kPractical,            // simultaneous ADAM / swap-regret updates
  kLagrangianPractical,  // ADAM / projected ascent on the Lagrangian
  kUnconstrained,        // ADAM on the objective only (control)
};

enum class DatasetMode { kTwoDataset, kOneDataset };

const char* to_string(Algorithm algorithm);
const char* to_string(DatasetMode mode);
Algorithm algorithm_from_string(const std::string& name);
DatasetMode dataset_mode_from_string(const std::string& name);

// One step as observed by instrumentation hooks.
struct StepInfo {
  Index t = 0;
  const DatasetView* theta_batch = nullptr;
  const DatasetView* lambda_batch = nullptr;
  const Eigen::VectorXd* lambda = nullptr;
  const Eigen::VectorXd* lambda_gradient = nullptr;
};

struct OracleOptions {
  double tolerance = 1e-6;  // rho
  int max_steps = 10000;
  double initial_step = 1.0;
  int max_backtracks = 40;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::kPractical;
  DatasetMode mode = DatasetMode::kTwoDataset;
  Index iterations = 10000;       // T, or T_lambda for the continuous solver
  Index inner_iterations = 1000;  // T_theta, continuous solver only
  AdamOptions adam;               // eta_theta is adam.step_size
  double eta_lambda = 0.1;
  // Discrete/continuous: use sqrt((m+1) ln(m+1) / (T B^2)) with B the a-priori
  // payoff bound of the problem instead of eta_lambda.
  bool theoretical_eta_lambda = false;
  double covering_radius = 0.5;
  OracleOptions oracle;
  bool cache_oracle = true;
  double mu = 0.0;                           // strong convexity, continuous solver
  double theta_radius = kUnboundedRadius;    // Theta = 2-norm ball
  double lambda_radius = 0.0;                // R; <= 0 means 10 * m
  Index batch_size = 64;
  std::uint64_t seed = 0;
  Index num_snapshots = 100;
  bool warm_start_stationary = false;
  std::function<void(const StepInfo&)> observer;

  void validate(Index num_constraints) const;
};

struct IterateSnapshot {
  Index t = 0;  // 0-based iteration index
  Model model;
  Eigen::VectorXd lambda;
  double lambda_objective_weight = 1.0;  // lambda_1 in the proxy game
  double train_error = 0.0;
  double train_objective = 0.0;  // surrogate
  Eigen::VectorXd train_constraints;
  Eigen::VectorXd val_constraints;
};

struct IterateTrace {
  Algorithm algorithm = Algorithm::kPractical;
  DatasetMode mode = DatasetMode::kTwoDataset;
  MultiplierRegime regime = MultiplierRegime::kProxySimplex;
  Index iterations = 0;
  std::vector<Eigen::VectorXd> lambdas;   // one per iteration
  std::vector<Eigen::VectorXd> payoffs;   // lambda-gradient used at each iteration
  std::vector<IterateSnapshot> snapshots;  // evenly spaced, endpoints included
  Index oracle_calls = 0;
  Index skipped_constraint_steps = 0;
  double payoff_bound = 0.0;  // observed max ||payoff||_inf
  double eta_lambda = 0.0;    // step actually used

  // Objective = train error, constraints = val constraints, per snapshot.
  ShrinkInput shrink_input() const;
  std::vector<Model> snapshot_models() const;
  // Largest -max_i c_i over snapshots on val (the best observed margin).
  double best_feasibility_margin() const;
  double mean_lambda_objective_weight() const;
};

// Evenly spaced indices in [0, T), first and last included, at most count.
std::vector<Index> snapshot_schedule(Index iterations, Index count);

// A-priori bound on |c_i| for every true constraint: |constant| + sum |coef|.
double payoff_bound(const ConstrainedProblem& problem);

using DifferentiableObjective = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient)>;

struct OracleResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  int steps = 0;
};

// Deterministic projected descent with backtracking; stops when a step
// decreases the objective by less than tolerance / 10 or after max_steps.
OracleResult minimize_deterministic(const DifferentiableObjective& objective, Eigen::VectorXd start,
                                    const OracleOptions& options, double radius = kUnboundedRadius);

// Deterministic approximate minimizer of L_theta(., lambda) on train. Same
// lambda (to 12 decimals) and seed give bit-identical parameters.
Model oracle_minimize(const ConstrainedProblem& problem, const Architecture& arch, const Eigen::VectorXd& lambda,
                      const DatasetView& train, const OracleOptions& options, std::uint64_t seed = 0,
                      double radius = kUnboundedRadius);

struct InnerDescentResult {
  Eigen::VectorXd average;  // mean of the T_theta inner iterates, starting at 0
  double max_gradient_norm = 0.0;
};

// theta_{s+1} = Proj(theta_s - g_s / (mu s)) from theta_1 = 0, averaged.
InnerDescentResult strongly_convex_descent(const DifferentiableObjective& objective, Index dim, double mu,
                                           Index iterations, double radius);

IterateTrace run_discrete(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                          const DatasetView& val, const SolverConfig& config);
IterateTrace run_continuous(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                            const DatasetView& val, const SolverConfig& config);
IterateTrace run_practical(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                           const DatasetView& val, const SolverConfig& config);
IterateTrace run_lagrangian_practical(const ConstrainedProblem& problem, const Architecture& arch,
                                      const DatasetView& train, const DatasetView& val, const SolverConfig& config);
IterateTrace run_unconstrained(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                               const DatasetView& val, const SolverConfig& config);

// Dispatches on config.algorithm.
IterateTrace run_solver(const ConstrainedProblem& problem, const Architecture& arch, const DatasetView& train,
                        const DatasetView& val, const SolverConfig& config);

// Probabilities proportional to lambda_1 of each stored iterate (uniform for
// the Lagrangian and unconstrained regimes).
StochasticClassifier build_weighted_stochastic_classifier(const IterateTrace& trace);

// Trace CSV: one row per snapshot. Columns: t, lambda_0.., train_error,
// train_objective, train_c_1.., val_c_1..
void write_trace_csv(const std::string& path, const IterateTrace& trace);
ShrinkInput read_trace_csv(const std::string& path);
// Snapshot models as checkpoint files <dir>/theta_<t>.bin.
void write_trace_checkpoints(const std::string& directory, const IterateTrace& trace);

}  // namespace ratecon
