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
#include "ratecon/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ratecon/error.hpp"
#include "ratecon/log.hpp"

namespace ratecon {

namespace {

bool predicted_positive(double f) { return f > 0.0; }

bool matches(const DatasetView& data, Index k, LabelFilter label, Index group) {
  if (label == LabelFilter::kPositive && data.label(k) <= 0.0) return false;
  if (label == LabelFilter::kNegative && data.label(k) > 0.0) return false;
  return group < 0 || data.in_group(k, group);
}

// Rate statistics of one compiled term on a view.
struct TermStats {
  Index count = 0;
  double positive_rate = 0.0;
  double hinge_positive = 0.0;  // mean max(0, 1 + f) >= positive rate
  double hinge_negative = 0.0;  // mean max(0, 1 - f) >= negative rate
};

TermStats term_stats(const CompiledTerm& term, const Eigen::VectorXd& f, const DatasetView& data) {
  TermStats s;
  for (Index k = 0; k < data.size(); ++k) {
    if (!matches(data, k, term.label, term.group)) continue;
    ++s.count;
    if (predicted_positive(f[k])) s.positive_rate += 1.0;
    s.hinge_positive += std::max(0.0, 1.0 + f[k]);
    s.hinge_negative += std::max(0.0, 1.0 - f[k]);
  }
  if (s.count > 0) {
    const double inv = 1.0 / static_cast<double>(s.count);
    s.positive_rate *= inv;
    s.hinge_positive *= inv;
    s.hinge_negative *= inv;
  }
  return s;
}

void check_margins(const Eigen::VectorXd& f, const DatasetView& data) {
  if (f.size() != data.size()) throw SchemaError("margin count does not match dataset size");
}

// Returns false when some term of the constraint has an empty denominator.
bool constraint_defined(const CompiledConstraint& c, const Eigen::VectorXd& f, const DatasetView& data,
                        std::vector<TermStats>& stats) {
  stats.clear();
  for (const auto& term : c.terms) {
    stats.push_back(term_stats(term, f, data));
    if (stats.back().count == 0) return false;
  }
  return true;
}

void handle_empty(const CompiledConstraint& c, EmptyGroupPolicy policy) {
  if (policy == EmptyGroupPolicy::kThrow) {
    throw UndefinedConstraintError(c.name, "a rate denominator is empty on this data");
  }
  log::warn_once("empty-group:" + c.name,
                 "constraint '" + c.name + "' has an empty group on a batch; skipping its contribution");
}

struct ObjectiveStats {
  Index count = 0;
  double error = 0.0;
  double hinge = 0.0;
};

bool objective_includes(ObjectiveKind kind, double y) {
  switch (kind) {
    case ObjectiveKind::kErrorRate: return true;
    case ObjectiveKind::kFalsePositiveRate: return y < 0.0;
    case ObjectiveKind::kFalseNegativeRate: return y > 0.0;
  }
  return true;
}

bool is_error(double y, double f) { return y > 0.0 ? !predicted_positive(f) : predicted_positive(f); }

ObjectiveStats objective_stats(ObjectiveKind kind, const Eigen::VectorXd& f, const DatasetView& data) {
  ObjectiveStats s;
  for (Index k = 0; k < data.size(); ++k) {
    const double y = data.label(k);
    if (!objective_includes(kind, y)) continue;
    ++s.count;
    if (is_error(y, f[k])) s.error += 1.0;
    s.hinge += std::max(0.0, 1.0 - y * f[k]);
  }
  if (s.count > 0) {
    s.error /= static_cast<double>(s.count);
    s.hinge /= static_cast<double>(s.count);
  }
  return s;
}

ObjectiveStats checked_objective(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                 const DatasetView& data) {
  check_margins(f, data);
  auto s = objective_stats(problem.objective().kind, f, data);
  if (s.count == 0) throw UndefinedConstraintError("objective", "no examples of the objective's class");
  return s;
}

double l2_term(const ConstrainedProblem& problem, const Model& model) {
  if (problem.l2() <= 0.0) return 0.0;
  return 0.5 * problem.l2() * model.params().squaredNorm();
}

}  // namespace

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kRecallFloor: return "recall_floor";
    case ConstraintKind::kPositiveRateRatioFloor: return "positive_rate_ratio_floor";
    case ConstraintKind::kPositiveRateGapCapOnPositives: return "positive_rate_gap_cap_on_positives";
    case ConstraintKind::kGroupFprVsOverall: return "group_fpr_vs_overall";
    case ConstraintKind::kCustom: return "custom";
  }
  return "?";
}

ConstraintKind constraint_kind_from_string(const std::string& name) {
  for (auto kind : {ConstraintKind::kRecallFloor, ConstraintKind::kPositiveRateRatioFloor,
                    ConstraintKind::kPositiveRateGapCapOnPositives, ConstraintKind::kGroupFprVsOverall,
                    ConstraintKind::kCustom}) {
    if (name == to_string(kind)) return kind;
  }
  throw ParseError("unknown constraint kind '" + name + "'");
}

RateConstraintSpec RateConstraintSpec::recall_floor(double threshold, std::string group) {
  return {ConstraintKind::kRecallFloor, std::move(group), threshold, {}, {}, 0.0};
}

RateConstraintSpec RateConstraintSpec::positive_rate_ratio_floor(double threshold, std::string group) {
  return {ConstraintKind::kPositiveRateRatioFloor, std::move(group), threshold, {}, {}, 0.0};
}

RateConstraintSpec RateConstraintSpec::positive_rate_gap_cap_on_positives(double threshold, std::string group) {
  return {ConstraintKind::kPositiveRateGapCapOnPositives, std::move(group), threshold, {}, {}, 0.0};
}

RateConstraintSpec RateConstraintSpec::group_fpr_vs_overall(std::string group, double slack) {
  return {ConstraintKind::kGroupFprVsOverall, std::move(group), slack, {}, {}, 0.0};
}

RateConstraintSpec RateConstraintSpec::custom(std::string name, std::vector<RateTerm> terms, double constant) {
  return {ConstraintKind::kCustom, {}, 0.0, std::move(name), std::move(terms), constant};
}

std::vector<RateTerm> RateConstraintSpec::expand_terms() const {
  switch (kind) {
    case ConstraintKind::kRecallFloor:
      return {{-1.0, LabelFilter::kPositive, group}};
    case ConstraintKind::kPositiveRateRatioFloor:
      return {{threshold, LabelFilter::kAny, {}}, {-1.0, LabelFilter::kAny, group}};
    case ConstraintKind::kPositiveRateGapCapOnPositives:
      return {{1.0, LabelFilter::kPositive, group}, {-1.0, LabelFilter::kPositive, {}}};
    case ConstraintKind::kGroupFprVsOverall:
      return {{1.0, LabelFilter::kNegative, group}, {-1.0, LabelFilter::kNegative, {}}};
    case ConstraintKind::kCustom:
      return terms;
  }
  return {};
}

double RateConstraintSpec::expand_constant() const {
  switch (kind) {
    case ConstraintKind::kRecallFloor: return threshold;
    case ConstraintKind::kPositiveRateRatioFloor: return 0.0;
    case ConstraintKind::kPositiveRateGapCapOnPositives: return -threshold;
    case ConstraintKind::kGroupFprVsOverall: return -threshold;
    case ConstraintKind::kCustom: return constant;
  }
  return 0.0;
}

std::string RateConstraintSpec::display_name() const {
  if (!name.empty()) return name;
  std::string out = to_string(kind);
  if (!group.empty()) out += "[" + group + "]";
  return out;
}

ConstrainedProblem::ConstrainedProblem(LossSpec objective, std::vector<RateConstraintSpec> constraints,
                                       const std::vector<std::string>& group_schema, double l2)
    : objective_(objective), specs_(std::move(constraints)), schema_(group_schema), l2_(l2) {
  if (specs_.empty()) throw ContractError("a constrained problem needs at least one constraint");
  if (l2 < 0.0) throw ContractError("l2 coefficient must be nonnegative");
  for (const auto& spec : specs_) {
    CompiledConstraint compiled;
    compiled.name = spec.display_name();
    compiled.constant = spec.expand_constant();
    for (const auto& term : spec.expand_terms()) {
      Index group = -1;
      if (!term.group.empty()) {
        auto it = std::find(schema_.begin(), schema_.end(), term.group);
        if (it == schema_.end()) {
          throw SchemaError("constraint '" + compiled.name + "' references unknown group '" + term.group + "'");
        }
        group = static_cast<Index>(it - schema_.begin());
      }
      if (!std::isfinite(term.coefficient)) throw ContractError("rate coefficients must be finite");
      compiled.terms.push_back({term.coefficient, term.label, group});
    }
    if (compiled.terms.empty()) throw ContractError("constraint '" + compiled.name + "' has no rate terms");
    compiled_.push_back(std::move(compiled));
  }
}

ConstrainedProblem ConstrainedProblem::without_constraints() const {
  ConstrainedProblem out;
  out.objective_ = objective_;
  out.schema_ = schema_;
  out.l2_ = l2_;
  return out;
}

LossWeights LossWeights::from_simplex(const Eigen::VectorXd& lambda, double tolerance) {
  if (lambda.size() < 1) throw ContractError("lambda must have at least one coordinate");
  if (!lambda.allFinite()) throw ContractError("lambda must be finite");
  if (std::abs(lambda.sum() - 1.0) > tolerance || lambda.minCoeff() < -tolerance) {
    throw ContractError("lambda is not on the simplex");
  }
  LossWeights w;
  const Eigen::VectorXd clamped = lambda.cwiseMax(0.0);
  w.objective = clamped[0];
  w.constraints = clamped.tail(lambda.size() - 1);
  return w;
}

LossWeights LossWeights::from_lagrangian(const Eigen::VectorXd& multipliers) {
  if (!multipliers.allFinite()) throw ContractError("multipliers must be finite");
  if (multipliers.size() > 0 && multipliers.minCoeff() < 0.0) throw ContractError("multipliers must be nonnegative");
  return {1.0, multipliers};
}

namespace margins {

double objective_error(const ConstrainedProblem& problem, const Eigen::VectorXd& f, const DatasetView& data) {
  return checked_objective(problem, f, data).error;
}

double objective_hinge(const ConstrainedProblem& problem, const Eigen::VectorXd& f, const DatasetView& data) {
  return checked_objective(problem, f, data).hinge;
}

Eigen::VectorXd constraint_values(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                  const DatasetView& data, EmptyGroupPolicy policy) {
  check_margins(f, data);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(problem.num_constraints());
  std::vector<TermStats> stats;
  for (Index i = 0; i < problem.num_constraints(); ++i) {
    const auto& c = problem.compiled()[i];
    if (!constraint_defined(c, f, data, stats)) {
      handle_empty(c, policy);
      continue;
    }
    double value = c.constant;
    for (std::size_t k = 0; k < c.terms.size(); ++k) value += c.terms[k].coefficient * stats[k].positive_rate;
    out[i] = value;
  }
  return out;
}

Eigen::VectorXd proxy_constraint_values(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                        const DatasetView& data, EmptyGroupPolicy policy) {
  check_margins(f, data);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(problem.num_constraints());
  std::vector<TermStats> stats;
  for (Index i = 0; i < problem.num_constraints(); ++i) {
    const auto& c = problem.compiled()[i];
    if (!constraint_defined(c, f, data, stats)) {
      handle_empty(c, policy);
      continue;
    }
    // A negative coefficient multiplies a positive rate = 1 - negative rate;
    // bounding the negative rate from above keeps the whole term an upper bound.
    double value = c.constant;
    for (std::size_t k = 0; k < c.terms.size(); ++k) {
      const double a = c.terms[k].coefficient;
      value += a >= 0.0 ? a * stats[k].hinge_positive : a - a * stats[k].hinge_negative;
    }
    out[i] = value;
  }
  return out;
}

WeightedSurrogate weighted_surrogate(const ConstrainedProblem& problem, const Eigen::VectorXd& f,
                                     const DatasetView& data, const LossWeights& weights,
                                     EmptyGroupPolicy policy) {
  check_margins(f, data);
  if (weights.constraints.size() != problem.num_constraints()) {
    throw ContractError("weight vector does not match the number of constraints");
  }
  WeightedSurrogate out;
  out.dvalue_dmargin = Eigen::VectorXd::Zero(data.size());

  if (weights.objective != 0.0) {
    const auto kind = problem.objective().kind;
    Index count = 0;
    for (Index k = 0; k < data.size(); ++k) count += objective_includes(kind, data.label(k)) ? 1 : 0;
    if (count == 0) {
      if (policy == EmptyGroupPolicy::kThrow) {
        throw UndefinedConstraintError("objective", "no examples of the objective's class");
      }
      log::warn_once("empty-group:objective", "objective class empty on a batch; skipping");
    } else {
      const double scale = weights.objective / static_cast<double>(count);
      for (Index k = 0; k < data.size(); ++k) {
        const double y = data.label(k);
        if (!objective_includes(kind, y)) continue;
        const double arg = 1.0 - y * f[k];
        if (arg > 0.0) {
          out.value += scale * arg;
          out.dvalue_dmargin[k] -= scale * y;
        }
      }
    }
  }

  std::vector<TermStats> stats;
  for (Index i = 0; i < problem.num_constraints(); ++i) {
    const double w = weights.constraints[i];
    if (w == 0.0) continue;
    const auto& c = problem.compiled()[i];
    if (!constraint_defined(c, f, data, stats)) {
      handle_empty(c, policy);
      continue;
    }
    out.value += w * c.constant;
    for (std::size_t t = 0; t < c.terms.size(); ++t) {
      const auto& term = c.terms[t];
      const double a = term.coefficient;
      const double scale = w * std::abs(a) / static_cast<double>(stats[t].count);
      out.value += a >= 0.0 ? w * a * stats[t].hinge_positive : w * (a - a * stats[t].hinge_negative);
      for (Index k = 0; k < data.size(); ++k) {
        if (!matches(data, k, term.label, term.group)) continue;
        if (a >= 0.0) {
          if (1.0 + f[k] > 0.0) out.dvalue_dmargin[k] += scale;
        } else {
          if (1.0 - f[k] > 0.0) out.dvalue_dmargin[k] -= scale;
        }
      }
    }
  }
  return out;
}

}  // namespace margins

double eval_objective(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                      bool surrogate) {
  const Eigen::VectorXd f = model.predict(data);
  if (!surrogate) return margins::objective_error(problem, f, data);
  return margins::objective_hinge(problem, f, data) + l2_term(problem, model);
}

Eigen::VectorXd eval_constraints(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                                 EmptyGroupPolicy policy) {
  return margins::constraint_values(problem, model.predict(data), data, policy);
}

Eigen::VectorXd eval_proxy_constraints(const ConstrainedProblem& problem, const Model& model,
                                       const DatasetView& data, EmptyGroupPolicy policy) {
  Eigen::VectorXd values = margins::proxy_constraint_values(problem, model.predict(data), data, policy);
  values.array() += l2_term(problem, model);
  return values;
}

double eval_L_theta(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& lambda,
                    const DatasetView& train) {
  if (lambda.size() != problem.num_constraints() + 1) throw ContractError("lambda must have m+1 coordinates");
  const LossWeights w = LossWeights::from_simplex(lambda);
  const auto s = margins::weighted_surrogate(problem, model.predict(train), train, w);
  return s.value + (w.objective + w.constraints.sum()) * l2_term(problem, model);
}

double eval_L_lambda(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& lambda,
                     const DatasetView& val) {
  if (lambda.size() != problem.num_constraints() + 1) throw ContractError("lambda must have m+1 coordinates");
  const LossWeights w = LossWeights::from_simplex(lambda);
  return w.constraints.dot(eval_constraints(problem, model, val));
}

Eigen::VectorXd lambda_gradient(const ConstrainedProblem& problem, const Model& model, const DatasetView& data,
                                EmptyGroupPolicy policy) {
  Eigen::VectorXd g(problem.num_constraints() + 1);
  g[0] = 0.0;
  g.tail(problem.num_constraints()) = eval_constraints(problem, model, data, policy);
  return g;
}

double eval_lagrangian(const ConstrainedProblem& problem, const Model& model, const Eigen::VectorXd& multipliers,
                       const DatasetView& data, LagrangianSide side) {
  if (multipliers.size() != problem.num_constraints()) throw ContractError("multipliers must have m coordinates");
  const LossWeights w = LossWeights::from_lagrangian(multipliers);
  if (side == LagrangianSide::kTheta) {
    const auto s = margins::weighted_surrogate(problem, model.predict(data), data, w);
    return s.value + (1.0 + multipliers.sum()) * l2_term(problem, model);
  }
  const Eigen::VectorXd f = model.predict(data);
  return margins::objective_error(problem, f, data) + multipliers.dot(margins::constraint_values(problem, f, data));
}

double max_violation(const Eigen::VectorXd& constraint_values) {
  if (constraint_values.size() == 0) return -std::numeric_limits<double>::infinity();
  return constraint_values.maxCoeff();
}

}  // namespace ratecon
