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

#include <string>
#include <vector>

#include "ratecon/dataset.hpp"
#include "ratecon/model.hpp"

namespace ratecon {

// The objective l_0. Metrics use the indicator form, training uses the
// unit-margin hinge upper bound.
enum class ObjectiveKind {
  kErrorRate,          // sign(f) != y with f = 0 predicted negative; hinge max(0, 1 - y f)
  kFalsePositiveRate,  // over y = -1: 1{f > 0}, hinge max(0, 1 + f)
  kFalseNegativeRate,  // over y = +1: 1{f <= 0}, hinge max(0, 1 - f)
};

struct LossSpec {
  ObjectiveKind kind = ObjectiveKind::kErrorRate;
};

enum class LabelFilter { kAny, kPositive, kNegative };

// coefficient * Pr{f(x) > 0 | label filter, group}. An empty group name
// means the whole population.
struct RateTerm {
  double coefficient = 0.0;
  LabelFilter label = LabelFilter::kAny;
  std::string group;
};

enum class ConstraintKind {
  kRecallFloor,                    // threshold - Pr{f > 0 | y = 1, g}
  kPositiveRateRatioFloor,         // threshold * Pr{f > 0} - Pr{f > 0 | g}
  kPositiveRateGapCapOnPositives,  // Pr{f > 0 | y = 1, g} - Pr{f > 0 | y = 1} - threshold
  kGroupFprVsOverall,              // Pr{f > 0 | y = -1, g} - Pr{f > 0 | y = -1} - threshold
  kCustom,                         // constant + sum of explicit terms
};

const char* to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& name);

// A rate constraint written so that value <= 0 means satisfied.
struct RateConstraintSpec {
  ConstraintKind kind = ConstraintKind::kRecallFloor;
  std::string group;
  double threshold = 0.0;
  std::string name;

  // Used only by kCustom.
  std::vector<RateTerm> terms;
  double constant = 0.0;

  static RateConstraintSpec recall_floor(double threshold, std::string group = {});
  static RateConstraintSpec positive_rate_ratio_floor(double threshold, std::string group);
  static RateConstraintSpec positive_rate_gap_cap_on_positives(double threshold, std::string group);
  static RateConstraintSpec group_fpr_vs_overall(std::string group, double slack = 0.0);
  static RateConstraintSpec custom(std::string name, std::vector<RateTerm> terms, double constant);

  // The linear combination of rates this spec stands for.
  std::vector<RateTerm> expand_terms() const;
  double expand_constant() const;
  std::string display_name() const;
};

struct CompiledTerm {
  double coefficient;
  LabelFilter label;
  Index group;  // -1 = everyone
};

struct CompiledConstraint {
  std::string name;
  double constant = 0.0;
  std::vector<CompiledTerm> terms;
};

// What to do when a rate denominator is empty on the evaluated data.
enum class EmptyGroupPolicy {
  kThrow,  // full-data metrics: UndefinedConstraintError
  kSkip,   // minibatch steps: the constraint contributes nothing, logged once
};

// Objective, m rate constraints and their hinge proxies, compiled against
// the group schema of the data they will be evaluated on.
class ConstrainedProblem {
 public:
  ConstrainedProblem(LossSpec objective, std::vector<RateConstraintSpec> constraints,
                     const std::vector<std::string>& group_schema, double l2 = 0.0);

  const LossSpec& objective() const { return objective_; }
  const std::vector<RateConstraintSpec>& constraint_specs() const { return specs_; }
  const std::vector<CompiledConstraint>& compiled() const { return compiled_; }
  Index num_constraints() const { return static_cast<Index>(compiled_.size()); }
  // mu/2 ||theta||^2 added to l_0 and every proxy (strong convexity); 0 by default.
  double l2() const { return l2_; }
  void set_l2(double mu) { l2_ = mu; }

  // Same constraints with the objective only (m = 0), for unconstrained baselines.
  ConstrainedProblem without_constraints() const;

 private:
  ConstrainedProblem() = default;

  LossSpec objective_;
  std::vector<RateConstraintSpec> specs_;
  std::vector<CompiledConstraint> compiled_;
  std::vector<std::string> schema_;
  double l2_ = 0.0;
};

// Weights on (l_0, proxy_1..proxy_m). Proxy-Lagrangian: the simplex point
// lambda itself. Lagrangian: (1, lambda_1..lambda_m).
struct LossWeights {
  double objective = 1.0;
  Eigen::VectorXd constraints;

  static LossWeights from_simplex(const Eigen::VectorXd& lambda, double tolerance = 1e-9);
  static LossWeights from_lagrangian(const Eigen::VectorXd& multipliers);
};

// Margin-level evaluation, shared by the model-level API below.
namespace margins {

double objective_error(const ConstrainedProblem& problem, const Eigen::VectorXd& f, const DatasetView& data);
double objective_hinge(const ConstrainedProblem& problem, const Eigen::VectorXd& f, const DatasetView& data);
Eigen::VectorXd constraint_values(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                  const DatasetView& data, EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);
Eigen::VectorXd proxy_constraint_values(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                        const DatasetView& data,
                                        EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);

struct WeightedSurrogate {
  double value = 0.0;            // excludes the l2 term
  Eigen::VectorXd dvalue_dmargin;  // per example of the view
};

// sum of weights over hinge objective and hinge proxies, with the
// derivative of that sum with respect to each margin.
WeightedSurrogate weighted_surrogate(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                     const DatasetView& data, const LossWeights& weights,
                                     EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);

}  // namespace margins

// (1/n) sum l_0: hinge surrogate (plus l2 term) when surrogate is true,
// otherwise the indicator-based rate.
double eval_objective(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                      bool surrogate = true);

// True (indicator) constraint values; <= 0 means satisfied.
Eigen::VectorXd eval_constraints(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                                 EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);

// Hinge proxy constraint values (plus l2 term); componentwise >= eval_constraints.
Eigen::VectorXd eval_proxy_constraints(const ConstrainedProblem& problem, const Model& model,
                                       const DatasetView& data,
                                       EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);

// theta-player objective: lambda_1 * l_0 + sum lambda_{i+1} * proxy_i on train.
double eval_L_theta(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& lambda,
                    const DatasetView& train);

// lambda-player objective: sum lambda_{i+1} * c_i with true constraints on val.
double eval_L_lambda(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& lambda,
                     const DatasetView& val);

// Supergradient of eval_L_lambda in lambda: (0, c_1, ..., c_m).
Eigen::VectorXd lambda_gradient(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                                EmptyGroupPolicy policy = EmptyGroupPolicy::kThrow);

enum class LagrangianSide {
  kTheta,   // hinge objective + sum lambda_i * proxy_i
  kLambda,  // indicator objective + sum lambda_i * c_i
};

double eval_lagrangian(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& multipliers,
                       const DatasetView& data, LagrangianSide side = LagrangianSide::kTheta);

// Largest constraint value (signed); -inf when m = 0.
double max_violation(const Eigen::VectorXd& constraint_values);

}  // namespace ratecon
