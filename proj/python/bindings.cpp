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
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include <array>
#include <utility>

#include "ratecon/covering.hpp"
#include "ratecon/data.hpp"
#include "ratecon/error.hpp"
#include "ratecon/experiment.hpp"
#include "ratecon/game.hpp"
#include "ratecon/lp.hpp"
#include "ratecon/problem.hpp"
#include "ratecon/shrinking.hpp"
#include "ratecon/solvers.hpp"

namespace py = pybind11;
using namespace ratecon;
using nlohmann::json;

namespace {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DatasetView make_view(const DenseMatrix& x, const Eigen::VectorXd& y, const DenseMatrix& groups,
                      const std::vector<std::string>& names, Role role) {
  if (groups.rows() != x.rows() && groups.size() > 0) throw SchemaError("groups must have one row per example");
  GroupMatrix g = GroupMatrix::Zero(x.rows(), static_cast<Index>(names.size()));
  if (groups.cols() != static_cast<Index>(names.size()) && groups.size() > 0) {
    throw SchemaError("groups must have one column per group name");
  }
  for (Index i = 0; i < groups.rows(); ++i)
    for (Index k = 0; k < groups.cols(); ++k) g(i, k) = groups(i, k) != 0.0 ? 1 : 0;
  return DatasetView::from_arrays(x, y, std::move(g), names, role);
}

ConstrainedProblem make_problem(const std::string& constraints_json, const std::string& objective,
                                const std::vector<std::string>& names, double l2) {
  std::vector<RateConstraintSpec> specs;
  for (const auto& c : json::parse(constraints_json)) specs.push_back(constraint_from_json(c));
  LossSpec loss;
  if (objective == "error_rate") {
    loss.kind = ObjectiveKind::kErrorRate;
  } else if (objective == "false_positive_rate") {
    loss.kind = ObjectiveKind::kFalsePositiveRate;
  } else if (objective == "false_negative_rate") {
    loss.kind = ObjectiveKind::kFalseNegativeRate;
  } else {
    throw ParseError("unknown objective '" + objective + "'");
  }
  return ConstrainedProblem(loss, std::move(specs), names, l2);
}

DenseMatrix stack(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) return DenseMatrix(0, 0);
  DenseMatrix out(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Index>(t)) = rows[t].transpose();
  return out;
}

std::vector<Eigen::VectorXd> unstack(const DenseMatrix& m) {
  std::vector<Eigen::VectorXd> out;
  for (Index t = 0; t < m.rows(); ++t) out.emplace_back(m.row(t).transpose());
  return out;
}

py::dict classifier_dict(const StochasticClassifier& c) {
  py::dict d;
  d["support"] = c.support;
  d["probabilities"] = c.probabilities;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ratecon, m) {
  m.doc() = "Two-player training with rate constraints.";

  py::register_exception<Error>(m, "RateconError", PyExc_RuntimeError);

  m.def(
      "stationary_distribution",
      [](const Eigen::MatrixXd& matrix) { return stationary_distribution(SwapMatrix(matrix)); }, py::arg("matrix"));
  m.def(
      "swap_update",
      [](const Eigen::MatrixXd& matrix, const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad, double eta) {
        return Eigen::MatrixXd(swap_update(SwapMatrix(matrix), lambda, grad, eta).values());
      },
      py::arg("matrix"), py::arg("lam"), py::arg("grad"), py::arg("eta"));
  m.def("project_simplex", &project_simplex, py::arg("v"), py::arg("total") = 1.0);
  m.def("project_nonneg_l1_ball", &project_nonneg_l1_ball, py::arg("v"), py::arg("radius"));
  m.def(
      "measure_swap_regret",
      [](const DenseMatrix& lambdas, const DenseMatrix& payoffs) {
        return measure_swap_regret(unstack(lambdas), unstack(payoffs));
      },
      py::arg("lambdas"), py::arg("payoffs"));
  m.def("swap_regret_bound", &swap_regret_bound, py::arg("payoff_bound"), py::arg("dim"), py::arg("horizon"));

  m.def(
      "covering_centers",
      [](Index num_constraints, double radius) { return stack(build_covering(num_constraints, radius).centers); },
      py::arg("num_constraints"), py::arg("radius"));

  m.def(
      "solve_lp",
      [](const Eigen::VectorXd& cost, const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub,
         const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq) {
        lp::Problem p{cost, a_ub, b_ub, a_eq, b_eq};
        const auto s = lp::solve(p);
        py::dict d;
        d["status"] = s.status == lp::Status::kOptimal ? "optimal"
                      : s.status == lp::Status::kInfeasible ? "infeasible" : "unbounded";
        d["x"] = s.x;
        d["objective"] = s.objective;
        return d;
      },
      py::arg("cost"), py::arg("a_ub") = Eigen::MatrixXd(0, 0), py::arg("b_ub") = Eigen::VectorXd(0),
      py::arg("a_eq") = Eigen::MatrixXd(0, 0), py::arg("b_eq") = Eigen::VectorXd(0));

  m.def(
      "shrink",
      [](const Eigen::VectorXd& objective, const Eigen::MatrixXd& constraints, double tolerance, int max_bisections,
         bool allow_negative_epsilon) {
        ShrinkInput in{objective, constraints};
        ShrinkOptions o{tolerance, max_bisections, allow_negative_epsilon};
        const auto r = shrink(in, o);
        py::dict d = classifier_dict(r.classifier);
        d["epsilon"] = r.epsilon;
        d["objective"] = r.objective;
        d["max_violation"] = r.max_violation;
        return d;
      },
      py::arg("objective"), py::arg("constraints"), py::arg("tolerance") = 1e-6, py::arg("max_bisections") = 60,
      py::arg("allow_negative_epsilon") = false);

  m.def(
      "generate_simulated",
      [](Index n, double sigma, std::uint64_t seed, std::uint64_t split_seed) {
        SimulatedSpec spec;
        spec.n = n;
        spec.sigma = sigma;
        spec.seed = seed;
        spec.split_seed = split_seed;
        const auto s = generate_simulated(spec);
        py::dict d;
        const std::array<std::pair<const char*, const DatasetView*>, 3> parts{
            {{"train", &s.train}, {"val", &s.val}, {"test", &s.test}}};
        for (const auto& [name, view] : parts) {
          Eigen::VectorXd y(view->size());
          for (Index i = 0; i < view->size(); ++i) y[i] = view->label(i);
          d[name] = py::make_tuple(DenseMatrix(view->gather_features()), y);
        }
        return d;
      },
      py::arg("n"), py::arg("sigma"), py::arg("seed") = 0, py::arg("split_seed") = 0);

  m.def(
      "evaluate",
      [](const std::string& constraints_json, const Eigen::VectorXd& params, Index hidden_units, const DenseMatrix& x,
         const Eigen::VectorXd& y, const DenseMatrix& groups, const std::vector<std::string>& group_names,
         const std::string& objective) {
        const auto data = make_view(x, y, groups, group_names, Role::kAll);
        const auto problem = make_problem(constraints_json, objective, group_names, 0.0);
        const Model model(Architecture{x.cols(), hidden_units}, params);
        py::dict d;
        d["error"] = eval_objective(problem, model, data, false);
        d["hinge"] = eval_objective(problem, model, data, true);
        d["constraints"] = eval_constraints(problem, model, data);
        d["proxy_constraints"] = eval_proxy_constraints(problem, model, data);
        d["scores"] = model.predict(data);
        return d;
      },
      py::arg("constraints"), py::arg("params"), py::arg("hidden_units"), py::arg("x"), py::arg("y"),
      py::arg("groups"), py::arg("group_names"), py::arg("objective") = "error_rate");

  m.def(
      "train",
      [](const std::string& constraints_json, const std::string& solver_json, Index hidden_units,
         const DenseMatrix& x_train, const Eigen::VectorXd& y_train, const DenseMatrix& g_train,
         const DenseMatrix& x_val, const Eigen::VectorXd& y_val, const DenseMatrix& g_val,
         const std::vector<std::string>& group_names, const std::string& objective, double l2, std::uint64_t seed) {
        const auto train = make_view(x_train, y_train, g_train, group_names, Role::kTrain);
        const auto val = make_view(x_val, y_val, g_val, group_names, Role::kVal);
        const auto problem = make_problem(constraints_json, objective, group_names, l2);
        const auto solvers = solvers_from_json(json::parse(solver_json));
        if (solvers.size() != 1) throw ContractError("train takes a solver entry with a single mode");
        SolverConfig config = solvers.front();
        config.seed = seed;
        IterateTrace trace;
        {
          py::gil_scoped_release release;
          trace = run_solver(problem, Architecture{x_train.cols(), hidden_units}, train, val, config);
        }
        const auto shrunk = shrink(trace.shrink_input());
        std::vector<Eigen::VectorXd> params, lambdas, train_c, val_c;
        std::vector<double> errors;
        std::vector<Index> steps;
        for (const auto& s : trace.snapshots) {
          params.push_back(s.model.params());
          lambdas.push_back(s.lambda);
          train_c.push_back(s.train_constraints);
          val_c.push_back(s.val_constraints);
          errors.push_back(s.train_error);
          steps.push_back(s.t);
        }
        py::dict d;
        d["t"] = steps;
        d["params"] = stack(params);
        d["lambdas"] = stack(lambdas);
        d["train_error"] = errors;
        d["train_constraints"] = stack(train_c);
        d["val_constraints"] = stack(val_c);
        d["classifier"] = classifier_dict(shrunk.classifier);
        d["epsilon"] = shrunk.epsilon;
        return d;
      },
      py::arg("constraints"), py::arg("solver"), py::arg("hidden_units"), py::arg("x_train"), py::arg("y_train"),
      py::arg("g_train"), py::arg("x_val"), py::arg("y_val"), py::arg("g_val"), py::arg("group_names"),
      py::arg("objective") = "error_rate", py::arg("l2") = 0.0, py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& output_dir, int workers) {
        const auto config = parse_experiment_config(json::parse(config_json));
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config, output_dir, workers);
        }
        return summary_json(config, result).dump();
      },
      py::arg("config"), py::arg("output_dir") = "", py::arg("workers") = 1);
}
