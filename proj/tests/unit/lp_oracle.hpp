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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace ratecon::testing {

// Brute-force optimum of min <c0, p> over p in the T-simplex with C p <= eps.
// Basic solutions have at most m+1 nonzeros, so the search runs over every
// support of that size: pairs on a grid of the given step, triples on a grid
// in the first weight with the feasible interval of the second solved exactly.
// Returns nullopt when no grid point is feasible.
inline std::optional<double> grid_shrink_optimum(const Eigen::VectorXd& c0, const Eigen::MatrixXd& c, double eps,
                                                 double step = 1e-4) {
  const Eigen::Index t = c0.size();
  const Eigen::Index m = c.rows();
  const double slack = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  auto feasible = [&](const Eigen::VectorXd& p) { return m == 0 || (c * p).maxCoeff() <= eps + slack; };
  for (Eigen::Index i = 0; i < t; ++i) {
    if (m == 0 || c.col(i).maxCoeff() <= eps + slack) best = std::min(best, c0[i]);
  }
  const auto count = static_cast<long>(std::llround(1.0 / step));
  if (m >= 1) {
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = i + 1; j < t; ++j) {
        for (long k = 0; k <= count; ++k) {
          const double a = static_cast<double>(k) / static_cast<double>(count);
          Eigen::VectorXd p = Eigen::VectorXd::Zero(t);
          p[i] = a;
          p[j] = 1.0 - a;
          if (feasible(p)) best = std::min(best, c0.dot(p));
        }
      }
    }
  }
  if (m >= 2) {
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = i + 1; j < t; ++j) {
        for (Eigen::Index l = j + 1; l < t; ++l) {
          for (long k = 0; k <= count; ++k) {
            const double a = static_cast<double>(k) / static_cast<double>(count);
            // p = (a, b, 1 - a - b) on (i, j, l), b in [0, 1 - a].
            double lo = 0.0;
            double hi = 1.0 - a;
            for (Eigen::Index r = 0; r < m && lo <= hi; ++r) {
              // a C_ri + b C_rj + (1 - a - b) C_rl <= eps
              const double base = a * c(r, i) + (1.0 - a) * c(r, l);
              const double coef = c(r, j) - c(r, l);
              const double rhs = eps + slack - base;
              if (std::abs(coef) < 1e-15) {
                if (rhs < 0.0) hi = -1.0;
              } else if (coef > 0.0) {
                hi = std::min(hi, rhs / coef);
              } else {
                lo = std::max(lo, rhs / coef);
              }
            }
            if (lo > hi) continue;
            for (double b : {lo, hi}) {
              const double value = a * c0[i] + b * c0[j] + (1.0 - a - b) * c0[l];
              best = std::min(best, value);
            }
          }
        }
      }
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

}  // namespace ratecon::testing
