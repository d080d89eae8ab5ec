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
#include "ratecon/shrinking.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ratecon/error.hpp"
#include "ratecon/lp.hpp"

namespace ratecon {

namespace {

constexpr double kSupportThreshold = 1e-12;

StochasticClassifier to_classifier(const Eigen::VectorXd& p) {
  StochasticClassifier out;
  double total = 0.0;
  for (Index t = 0; t < p.size(); ++t) {
    if (p[t] > kSupportThreshold) {
      out.support.push_back(t);
      out.probabilities.push_back(p[t]);
      total += p[t];
    }
  }
  for (auto& q : out.probabilities) q /= total;
  return out;
}

Eigen::VectorXd dense(const StochasticClassifier& c, Index n) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < c.size(); ++k) p[c.support[k]] += c.probabilities[k];
  return p;
}

}  // namespace

void ShrinkInput::validate() const {
  if (objective.size() < 1) throw ContractError("shrinking needs at least one iterate");
  if (constraints.cols() != objective.size()) throw SchemaError("constraint matrix must have one column per iterate");
  if (!objective.allFinite() || !constraints.allFinite()) throw NumericError("non-finite shrinking input");
}

void StochasticClassifier::validate(double tolerance) const {
  if (support.empty() || support.size() != probabilities.size()) {
    throw ContractError("stochastic classifier needs a nonempty support with one probability each");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    if (support[k] < 0) throw ContractError("negative support index");
    if (!(probabilities[k] >= 0.0)) throw ContractError("probabilities must be nonnegative");
    total += probabilities[k];
  }
  if (std::abs(total - 1.0) > tolerance) throw ContractError("probabilities must sum to one");
}

ShrinkLpResult solve_shrink_lp(const ShrinkInput& input, double epsilon) {
  input.validate();
  const Index t = input.num_iterates();
  lp::Problem problem;
  problem.cost = input.objective;
  problem.a_ub = input.constraints;
  problem.b_ub = Eigen::VectorXd::Constant(input.num_constraints(), epsilon);
  problem.a_eq = Eigen::MatrixXd::Ones(1, t);
  problem.b_eq = Eigen::VectorXd::Ones(1);
  const lp::Solution sol = lp::solve(problem);
  ShrinkLpResult out;
  out.infeasibility = sol.infeasibility;
  if (sol.status != lp::Status::kOptimal) return out;
  out.feasible = true;
  out.p = sol.x / sol.x.sum();
  out.objective = input.objective.dot(out.p);
  Index nonzero = 0;
  for (Index i = 0; i < t; ++i) nonzero += out.p[i] > kSupportThreshold ? 1 : 0;
  if (nonzero > input.num_constraints() + 1) throw NumericError("LP returned a non-vertex solution");
  return out;
}

ShrinkResult shrink(const ShrinkInput& input, const ShrinkOptions& options) {
  input.validate();
  ShrinkResult out;
  const Index m = input.num_constraints();
  if (m == 0) {
    Index best = 0;
    input.objective.minCoeff(&best);
    out.classifier = point_mass(best);
    out.objective = input.objective[best];
    out.max_violation = -std::numeric_limits<double>::infinity();
    return out;
  }

  // A point mass on the iterate with the smallest max violation is feasible at hi.
  double hi = input.constraints.colwise().maxCoeff().minCoeff();
  // No mixture can push constraint i below its smallest column value.
  double lo = options.allow_negative_epsilon ? input.constraints.rowwise().minCoeff().maxCoeff() : 0.0;

  ShrinkLpResult best;
  if (hi <= lo) {
    out.epsilon = options.allow_negative_epsilon ? hi : std::max(hi, 0.0);
    best = solve_shrink_lp(input, out.epsilon);
  } else {
    best = solve_shrink_lp(input, lo);
    if (best.feasible) {
      out.epsilon = lo;
    } else {
      best = solve_shrink_lp(input, hi);
      while (hi - lo > options.tolerance && out.bisections < options.max_bisections) {
        const double mid = 0.5 * (lo + hi);
        ++out.bisections;
        ShrinkLpResult trial = solve_shrink_lp(input, mid);
        if (trial.feasible) {
          hi = mid;
          best = std::move(trial);
        } else {
          lo = mid;
        }
      }
      out.epsilon = hi;
    }
  }
  if (!best.feasible) throw NumericError("shrinking LP infeasible at a level known to be feasible");
  out.classifier = to_classifier(best.p);
  const Eigen::VectorXd p = dense(out.classifier, input.num_iterates());
  out.objective = input.objective.dot(p);
  out.max_violation = (input.constraints * p).maxCoeff();
  return out;
}

StochasticClassifier point_mass(Index t) {
  if (t < 0) throw ContractError("negative iterate index");
  return {{t}, {1.0}};
}

StochasticMetrics combine_metrics(const StochasticClassifier& classifier, std::span<const double> errors,
                                  std::span<const Eigen::VectorXd> constraints) {
  classifier.validate();
  if (errors.size() != constraints.size()) throw ContractError("need one constraint vector per error");
  StochasticMetrics out;
  for (std::size_t k = 0; k < classifier.size(); ++k) {
    const auto idx = static_cast<std::size_t>(classifier.support[k]);
    if (idx >= errors.size()) throw ContractError("support index out of range");
    const double q = classifier.probabilities[k];
    out.error += q * errors[idx];
    if (out.constraints.size() == 0) out.constraints = Eigen::VectorXd::Zero(constraints[idx].size());
    out.constraints += q * constraints[idx];
  }
  return out;
}

StochasticMetrics evaluate_stochastic(const StochasticClassifier& classifier, std::span<const Model> models,
                                      const ConstrainedProblem& problem, const DatasetView& data) {
  classifier.validate();
  StochasticMetrics out;
  out.constraints = Eigen::VectorXd::Zero(problem.num_constraints());
  for (std::size_t k = 0; k < classifier.size(); ++k) {
    const auto idx = static_cast<std::size_t>(classifier.support[k]);
    if (idx >= models.size()) throw ContractError("support index out of range");
    const double q = classifier.probabilities[k];
    const Eigen::VectorXd f = models[idx].predict(data);
    out.error += q * margins::objective_error(problem, f, data);
    if (problem.num_constraints() > 0) out.constraints += q * margins::constraint_values(problem, f, data);
  }
  return out;
}

void write_classifier_csv(const std::string& path, const StochasticClassifier& classifier) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "index,probability\n";
  char buf[64];
  for (std::size_t k = 0; k < classifier.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", classifier.probabilities[k]);
    out << classifier.support[k] << "," << buf << "\n";
  }
}

StochasticClassifier read_classifier_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "index,probability") throw ParseError("bad classifier header in " + path);
  StochasticClassifier out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("bad classifier row: " + line);
    try {
      out.support.push_back(std::stoll(line.substr(0, comma)));
      out.probabilities.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("bad classifier row: " + line);
    }
  }
  out.validate(1e-9);
  return out;
}

}  // namespace ratecon
