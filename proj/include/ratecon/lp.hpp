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

namespace ratecon::lp {

// min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
struct Problem {
  Eigen::VectorXd cost;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  Eigen::VectorXd x;  // a basic (vertex) solution when optimal
  double objective = 0.0;
  double infeasibility = 0.0;  // phase-one optimum; > 0 certifies infeasibility
  int pivots = 0;
  bool used_bland = false;
};

struct Options {
  double tolerance = 1e-9;
  int max_pivots = 100000;
  // Consecutive degenerate pivots before switching from Dantzig's rule to
  // Bland's anti-cycling rule.
  int degenerate_switch = 50;
  bool force_bland = false;
};

// Dense two-phase tableau simplex.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace ratecon::lp
