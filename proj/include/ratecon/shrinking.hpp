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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratecon/dataset.hpp"
#include "ratecon/model.hpp"
#include "ratecon/problem.hpp"

namespace ratecon {

// Per-iterate metrics fed to the sparsifying LP.
struct ShrinkInput {
  Eigen::VectorXd objective;    // length T, training objective per iterate
  Eigen::MatrixXd constraints;  // m x T, validation constraint values per iterate

  Index num_iterates() const { return objective.size(); }
  Index num_constraints() const { return constraints.rows(); }
  void validate() const;
};

// Distribution over iterates of a trace.
struct StochasticClassifier {
  std::vector<Index> support;  // indices into the trace's stored iterates
  std::vector<double> probabilities;

  std::size_t size() const { return support.size(); }
  void validate(double tolerance = 1e-9) const;
};

struct ShrinkLpResult {
  bool feasible = false;
  Eigen::VectorXd p;       // length T when feasible
  double objective = 0.0;  // <p, objective>
  double infeasibility = 0.0;
};

// min <p, c0> over p in the T-simplex subject to C p <= epsilon. The result
// is a vertex, so at most m+1 entries of p are nonzero.
ShrinkLpResult solve_shrink_lp(const ShrinkInput& input, double epsilon);

struct ShrinkOptions {
  double tolerance = 1e-6;
  int max_bisections = 60;
  // Let epsilon go below zero (down to max_i min_t C_it). Off by default:
  // the search is then over epsilon >= 0.
  bool allow_negative_epsilon = false;
};

struct ShrinkResult {
  StochasticClassifier classifier;
  double epsilon = 0.0;  // smallest feasible violation level found
  double objective = 0.0;
  double max_violation = 0.0;  // of the returned mixture on the constraint rows
  int bisections = 0;
};

// Bisection for the smallest feasible epsilon, then the LP vertex at it.
ShrinkResult shrink(const ShrinkInput& input, const ShrinkOptions& options = {});

// Point mass on iterate t.
StochasticClassifier point_mass(Index t);

struct StochasticMetrics {
  double error = 0.0;
  Eigen::VectorXd constraints;
  double max_violation() const { return ratecon::max_violation(constraints); }
};

// Expectation over the support using precomputed per-iterate metrics.
StochasticMetrics combine_metrics(const StochasticClassifier& classifier, std::span<const double> errors,
                                  std::span<const Eigen::VectorXd> constraints);

// Expectation over the support of the 0/1 objective and true constraints.
// models[i] is the model for trace index i.
StochasticMetrics evaluate_stochastic(const StochasticClassifier& classifier, std::span<const Model> models,
                                      const ConstrainedProblem& problem, const DatasetView& data);

void write_classifier_csv(const std::string& path, const StochasticClassifier& classifier);
StochasticClassifier read_classifier_csv(const std::string& path);

}  // namespace ratecon
