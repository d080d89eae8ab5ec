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

#include <span>
#include <vector>

namespace ratecon {

// Left-stochastic, strictly positive (m+1) x (m+1) matrix: the state of the
// swap-regret lambda-player.
class SwapMatrix {
 public:
  // Every entry 1/(m+1).
  static SwapMatrix uniform(Eigen::Index dim);
  // Validates column sums (1e-12) and strict positivity.
  explicit SwapMatrix(Eigen::MatrixXd values);

  Eigen::Index dim() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  struct Unchecked {};
  SwapMatrix(Eigen::MatrixXd values, Unchecked) : values_(std::move(values)) {}
  friend SwapMatrix swap_update(const SwapMatrix&, const Eigen::VectorXd&, const Eigen::VectorXd&, double);

  Eigen::MatrixXd values_;
};

enum class MultiplierRegime {
  kProxySimplex,  // length m+1, on the simplex
  kLagrangian,    // length m, nonnegative, 1-norm <= radius
};

struct Multipliers {
  MultiplierRegime regime = MultiplierRegime::kProxySimplex;
  Eigen::VectorXd values;
  double radius = 0.0;  // Lagrangian regime only

  // Throws ContractError when the regime invariant fails beyond tolerance.
  void validate(double tolerance = 1e-9) const;
};

struct StationaryOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
  const Eigen::VectorXd* warm_start = nullptr;
};

// lambda with M lambda = lambda on the simplex, by power iteration with a
// dense linear-solve fallback. Throws NumericError if the residual
// ||M lambda - lambda||_1 stays above 1e-10.
Eigen::VectorXd stationary_distribution(const SwapMatrix& m, const StationaryOptions& options = {});

inline constexpr double kSwapExponentClip = 50.0;

// M .* exp(eta * grad lambda^T), then each column renormalized to sum 1.
// Exponents are clipped to +-50 (logged); entries are floored at the
// smallest positive normal double so strict positivity survives.
SwapMatrix swap_update(const SwapMatrix& m, const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad, double eta);

// Euclidean projection onto {lambda >= 0, ||lambda||_1 <= radius}.
Eigen::VectorXd project_nonneg_l1_ball(const Eigen::VectorXd& v, double radius);

// Euclidean projection onto {lambda >= 0, sum lambda = total}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double total = 1.0);

// lambda + eta * grad, projected onto the nonnegative 1-norm ball.
Multipliers projected_ascent_update(const Multipliers& lambda, const Eigen::VectorXd& grad, double eta,
                                    double radius);

// Swap regret of a sequence of plays against payoff vectors:
//   sum_i max_j (1/T) sum_t lambda_i^t g_j^t - (1/T) sum_t <lambda^t, g^t>.
double measure_swap_regret(std::span<const Eigen::VectorXd> lambdas, std::span<const Eigen::VectorXd> payoffs);

// 2 B sqrt((m+1) ln(m+1) / T), with dim = m+1.
double swap_regret_bound(double payoff_bound, Eigen::Index dim, Eigen::Index horizon);

// eta = sqrt((m+1) ln(m+1) / (T B^2)); the step that attains the bound above.
double theoretical_swap_step(double payoff_bound, Eigen::Index dim, Eigen::Index horizon);

}  // namespace ratecon
