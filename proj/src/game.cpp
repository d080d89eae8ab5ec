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
#include "ratecon/game.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ratecon/error.hpp"
#include "ratecon/log.hpp"

namespace ratecon {

namespace {

constexpr double kColumnTolerance = 1e-12;
constexpr double kResidualLimit = 1e-10;

double residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) { return (m * v - v).lpNorm<1>(); }

}  // namespace

SwapMatrix SwapMatrix::uniform(Eigen::Index dim) {
  if (dim < 1) throw ContractError("swap matrix needs at least one row");
  return SwapMatrix(Eigen::MatrixXd::Constant(dim, dim, 1.0 / static_cast<double>(dim)), Unchecked{});
}

SwapMatrix::SwapMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.rows() != values_.cols()) throw ContractError("swap matrix must be square");
  if (!values_.allFinite() || values_.minCoeff() <= 0.0) throw ContractError("swap matrix must be strictly positive");
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    if (std::abs(values_.col(j).sum() - 1.0) > kColumnTolerance) {
      throw ContractError("swap matrix columns must sum to one");
    }
  }
}

void Multipliers::validate(double tolerance) const {
  if (!values.allFinite()) throw ContractError("multipliers must be finite");
  if (regime == MultiplierRegime::kProxySimplex) {
    if (values.size() < 1) throw ContractError("proxy multipliers need m+1 >= 1 coordinates");
    if (values.minCoeff() < -tolerance || std::abs(values.sum() - 1.0) > tolerance) {
      throw ContractError("proxy multipliers are not on the simplex");
    }
  } else {
    if (values.size() > 0 && values.minCoeff() < -tolerance) throw ContractError("Lagrange multipliers must be >= 0");
    if (values.lpNorm<1>() > radius + tolerance) throw ContractError("Lagrange multipliers exceed the radius");
  }
}

Eigen::VectorXd stationary_distribution(const SwapMatrix& swap, const StationaryOptions& options) {
  const Eigen::MatrixXd& m = swap.values();
  const Eigen::Index n = m.rows();
  Eigen::VectorXd v;
  if (options.warm_start != nullptr && options.warm_start->size() == n && options.warm_start->allFinite() &&
      options.warm_start->minCoeff() >= 0.0 && options.warm_start->sum() > 0.0) {
    v = *options.warm_start / options.warm_start->sum();
  } else {
    v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  }
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd next = m * v;
    next /= next.sum();
    const double change = (next - v).lpNorm<1>();
    v.swap(next);
    if (change <= options.tolerance) break;
  }
  if (residual(m, v) <= options.tolerance) return v;

  // Solve (M - I) v = 0 with the last equation replaced by sum v = 1.
  Eigen::MatrixXd a = m - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd direct = a.fullPivLu().solve(b);
  direct = direct.cwiseMax(0.0);
  if (direct.sum() > 0.0) direct /= direct.sum();
  const double r_direct = direct.allFinite() ? residual(m, direct) : std::numeric_limits<double>::infinity();
  const double r_power = residual(m, v);
  if (r_direct <= r_power && r_direct <= kResidualLimit) return direct;
  if (r_power <= kResidualLimit) return v;
  throw NumericError("stationary distribution did not converge", std::min(r_direct, r_power));
}

SwapMatrix swap_update(const SwapMatrix& swap, const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad,
                       double eta) {
  const Eigen::Index n = swap.dim();
  if (lambda.size() != n || grad.size() != n) throw ContractError("swap update dimension mismatch");
  if (!grad.allFinite() || !lambda.allFinite() || !std::isfinite(eta)) {
    throw NumericError("non-finite input to swap update");
  }
  Eigen::MatrixXd exponent = eta * grad * lambda.transpose();
  if (exponent.cwiseAbs().maxCoeff() > kSwapExponentClip) {
    log::warn_once("swap-clip", "swap update exponent clipped to +-50");
    exponent = exponent.cwiseMax(-kSwapExponentClip).cwiseMin(kSwapExponentClip);
  }
  Eigen::MatrixXd next = swap.values().array() * exponent.array().exp();
  constexpr double kFloor = std::numeric_limits<double>::min();
  for (Eigen::Index j = 0; j < n; ++j) {
    next.col(j) /= next.col(j).sum();
    next.col(j) = next.col(j).cwiseMax(kFloor);
    next.col(j) /= next.col(j).sum();
  }
  if (!next.allFinite()) throw NumericError("swap update produced non-finite entries");
  return SwapMatrix(std::move(next), SwapMatrix::Unchecked{});
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double total) {
  if (!(total > 0.0)) throw ContractError("simplex total must be positive");
  if (v.size() == 0) throw ContractError("cannot project an empty vector onto a simplex");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - total) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0);
}

Eigen::VectorXd project_nonneg_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (!(radius > 0.0)) throw ContractError("radius must be positive");
  Eigen::VectorXd clipped = v.cwiseMax(0.0);
  if (clipped.sum() <= radius) return clipped;
  return project_simplex(clipped, radius);
}

Multipliers projected_ascent_update(const Multipliers& lambda, const Eigen::VectorXd& grad, double eta,
                                    double radius) {
  if (lambda.regime != MultiplierRegime::kLagrangian) throw ContractError("projected ascent needs Lagrangian multipliers");
  if (grad.size() != lambda.values.size()) throw ContractError("gradient size does not match multipliers");
  if (!grad.allFinite()) throw NumericError("non-finite multiplier gradient");
  Multipliers out;
  out.regime = MultiplierRegime::kLagrangian;
  out.radius = radius;
  out.values = project_nonneg_l1_ball(lambda.values + eta * grad, radius);
  return out;
}

double measure_swap_regret(std::span<const Eigen::VectorXd> lambdas, std::span<const Eigen::VectorXd> payoffs) {
  if (lambdas.size() != payoffs.size()) throw ContractError("need one payoff per play");
  if (lambdas.empty()) return 0.0;
  const Eigen::Index n = lambdas.front().size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t t = 0; t < lambdas.size(); ++t) {
    if (lambdas[t].size() != n || payoffs[t].size() != n) throw ContractError("inconsistent play dimensions");
    a.noalias() += lambdas[t] * payoffs[t].transpose();
  }
  a /= static_cast<double>(lambdas.size());
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) best += a.row(i).maxCoeff();
  return best - a.trace();
}

double swap_regret_bound(double payoff_bound, Eigen::Index dim, Eigen::Index horizon) {
  if (dim < 1 || horizon < 1) throw ContractError("bound needs dim >= 1 and T >= 1");
  const double d = static_cast<double>(dim);
  return 2.0 * payoff_bound * std::sqrt(d * std::log(d) / static_cast<double>(horizon));
}

double theoretical_swap_step(double payoff_bound, Eigen::Index dim, Eigen::Index horizon) {
  if (!(payoff_bound > 0.0) || dim < 2 || horizon < 1) {
    throw ContractError("theoretical step needs B > 0, dim >= 2, T >= 1");
  }
  const double d = static_cast<double>(dim);
  return std::sqrt(d * std::log(d) / (static_cast<double>(horizon) * payoff_bound * payoff_bound));
}

}  // namespace ratecon
