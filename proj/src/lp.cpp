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
#include "ratecon/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ratecon/error.hpp"

namespace ratecon::lp {

namespace {

// Tableau with constraint rows 0..rows-1 and the reduced-cost row last; the
// right-hand side is the last column.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<Eigen::Index> basis;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;  // structural + slack + artificial columns

  double& rhs(Eigen::Index r) { return t(r, cols); }
  double rhs(Eigen::Index r) const { return t(r, cols); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t.row(r) /= t(r, c);
    for (Eigen::Index i = 0; i <= rows; ++i) {
      if (i == r) continue;
      const double factor = t(i, c);
      if (factor != 0.0) t.row(i) -= factor * t.row(r);
    }
    basis[r] = c;
  }
};

enum class Outcome { kOptimal, kUnbounded, kPivotLimit };

Outcome run_simplex(Tableau& tab, const std::vector<bool>& allowed, const Options& opt, int& pivots,
                    bool& used_bland) {
  bool bland = opt.force_bland;
  int degenerate = 0;
  while (true) {
    if (pivots >= opt.max_pivots) return Outcome::kPivotLimit;
    Eigen::Index enter = -1;
    double best = -opt.tolerance;
    for (Eigen::Index j = 0; j < tab.cols; ++j) {
      if (!allowed[j]) continue;
      const double rc = tab.t(tab.rows, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) return Outcome::kOptimal;

    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < tab.rows; ++i) {
      const double a = tab.t(i, enter);
      if (a <= opt.tolerance) continue;
      const double q = std::max(tab.rhs(i), 0.0) / a;
      if (q < ratio - opt.tolerance || (q <= ratio + opt.tolerance && leave >= 0 && tab.basis[i] < tab.basis[leave])) {
        if (q < ratio - opt.tolerance || leave < 0) ratio = q;
        leave = i;
      }
    }
    if (leave < 0) return Outcome::kUnbounded;
    tab.pivot(leave, enter);
    ++pivots;
    if (ratio <= opt.tolerance) {
      if (++degenerate >= opt.degenerate_switch && !bland) {
        bland = true;
        used_bland = true;
      }
    } else {
      degenerate = 0;
    }
  }
}

void set_cost_row(Tableau& tab, const Eigen::VectorXd& cost) {
  tab.t.row(tab.rows).setZero();
  tab.t.row(tab.rows).head(cost.size()) = cost.transpose();
  for (Eigen::Index i = 0; i < tab.rows; ++i) {
    const double cb = tab.t(tab.rows, tab.basis[i]);
    if (cb != 0.0) tab.t.row(tab.rows) -= cb * tab.t.row(i);
  }
}

}  // namespace

Solution solve(const Problem& p, const Options& opt) {
  const Eigen::Index n = p.cost.size();
  const Eigen::Index n_ub = p.b_ub.size();
  const Eigen::Index n_eq = p.b_eq.size();
  if ((n_ub > 0 && (p.a_ub.rows() != n_ub || p.a_ub.cols() != n)) ||
      (n_eq > 0 && (p.a_eq.rows() != n_eq || p.a_eq.cols() != n))) {
    throw ContractError("LP dimensions are inconsistent");
  }
  if (!p.cost.allFinite() || (n_ub > 0 && (!p.a_ub.allFinite() || !p.b_ub.allFinite())) ||
      (n_eq > 0 && (!p.a_eq.allFinite() || !p.b_eq.allFinite()))) {
    throw NumericError("non-finite LP data");
  }

  const Eigen::Index rows = n_ub + n_eq;
  Eigen::Index n_art = n_eq;
  for (Eigen::Index i = 0; i < n_ub; ++i) n_art += p.b_ub[i] < 0.0 ? 1 : 0;

  Tableau tab;
  tab.rows = rows;
  tab.cols = n + n_ub + n_art;
  tab.t = Eigen::MatrixXd::Zero(rows + 1, tab.cols + 1);
  tab.basis.assign(static_cast<std::size_t>(rows), -1);

  Eigen::Index art = n + n_ub;
  for (Eigen::Index i = 0; i < n_ub; ++i) {
    const double sign = p.b_ub[i] < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * p.a_ub.row(i);
    tab.t(i, n + i) = sign;
    tab.rhs(i) = sign * p.b_ub[i];
    if (sign > 0.0) {
      tab.basis[i] = n + i;
    } else {
      tab.t(i, art) = 1.0;
      tab.basis[i] = art++;
    }
  }
  for (Eigen::Index e = 0; e < n_eq; ++e) {
    const Eigen::Index i = n_ub + e;
    const double sign = p.b_eq[e] < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * p.a_eq.row(e);
    tab.rhs(i) = sign * p.b_eq[e];
    tab.t(i, art) = 1.0;
    tab.basis[i] = art++;
  }

  Solution sol;
  std::vector<bool> allowed(static_cast<std::size_t>(tab.cols), true);
  if (n_art > 0) {
    Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(tab.cols);
    phase_one.tail(n_art).setOnes();
    set_cost_row(tab, phase_one);
    if (run_simplex(tab, allowed, opt, sol.pivots, sol.used_bland) == Outcome::kPivotLimit) {
      throw NumericError("LP pivot limit reached in phase one");
    }
    sol.infeasibility = std::max(0.0, -tab.rhs(rows));
    double scale = 1.0;
    if (n_ub > 0) scale = std::max(scale, p.b_ub.cwiseAbs().maxCoeff());
    if (n_eq > 0) scale = std::max(scale, p.b_eq.cwiseAbs().maxCoeff());
    if (sol.infeasibility > opt.tolerance * scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    // Drive artificial variables out of the basis where a pivot exists.
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (tab.basis[i] < n + n_ub) continue;
      for (Eigen::Index j = 0; j < n + n_ub; ++j) {
        if (std::abs(tab.t(i, j)) > opt.tolerance) {
          tab.pivot(i, j);
          ++sol.pivots;
          break;
        }
      }
    }
    for (Eigen::Index j = n + n_ub; j < tab.cols; ++j) allowed[j] = false;
  }

  set_cost_row(tab, p.cost);
  const Outcome outcome = run_simplex(tab, allowed, opt, sol.pivots, sol.used_bland);
  if (outcome == Outcome::kPivotLimit) throw NumericError("LP pivot limit reached");
  if (outcome == Outcome::kUnbounded) {
    sol.status = Status::kUnbounded;
    return sol;
  }
  sol.status = Status::kOptimal;
  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (tab.basis[i] < n) sol.x[tab.basis[i]] = std::max(0.0, tab.rhs(i));
  }
  sol.objective = p.cost.dot(sol.x);
  return sol;
}

}  // namespace ratecon::lp
