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
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "ratecon/error.hpp"
#include "ratecon/model.hpp"
#include "ratecon/problem.hpp"
#include "ratecon/subgradient.hpp"

using namespace ratecon;
using ratecon::testing::margin_data;

namespace {

// Sum over the batch of the weighted hinge losses, used for finite differences.
double loss_at(const ConstrainedProblem& p, const Architecture& arch, const Eigen::VectorXd& theta,
               const LossWeights& w, const DatasetView& data) {
  return weighted_subgradient(p, Model(arch, theta), w, data, EmptyGroupPolicy::kThrow).value;
}

bool away_from_kinks(const Model& m, const DatasetView& data, double gap) {
  const Eigen::VectorXd f = m.predict(data);
  for (Index i = 0; i < f.size(); ++i) {
    if (std::abs(f[i] - 1.0) < gap || std::abs(f[i] + 1.0) < gap) return false;
  }
  const RowMatrix z = m.hidden_preactivations(data);
  return z.size() == 0 || z.cwiseAbs().minCoeff() >= gap;
}

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(Architecture::linear(5).num_params() == 6);
  CHECK(Architecture::mlp(5, 10).num_params() == 10 * 5 + 10 + 10 + 1);
  CHECK_THROWS_AS(Model(Architecture::linear(2), Eigen::VectorXd::Zero(2)), SchemaError);
}

TEST_CASE("linear forward pass") {
  auto data = DatasetView::from_arrays((RowMatrix(1, 3) << 2, 5, 7).finished(), Eigen::VectorXd::Ones(1),
                                       GroupMatrix(1, 0), {});
  CHECK(Model(Architecture::linear(3)).predict(data)[0] == 0.0);
  Eigen::VectorXd p(4);
  p << 1, 0, 0, 0;
  CHECK(Model(Architecture::linear(3), p).predict(data)[0] == 2.0);
}

TEST_CASE("mlp forward pass by hand") {
  // W1 = [[1, -1], [0.5, 2]], b1 = (0, -1), w2 = (2, -3), b2 = 0.5, x = (2, 1).
  Eigen::VectorXd p(9);
  p << 1, -1, 0.5, 2, 0, -1, 2, -3, 0.5;
  Model m(Architecture::mlp(2, 2), p);
  auto data = DatasetView::from_arrays((RowMatrix(2, 2) << 2, 1, -1, 0).finished(), Eigen::Vector2d(1, -1),
                                       GroupMatrix(2, 0), {});
  const auto f = m.predict(data);
  // Hidden: relu(1) = 1, relu(1 + 2 - 1) = 2 -> 0.5 + 2 - 6.
  CHECK(f[0] == doctest::Approx(-3.5));
  // Hidden: relu(-1) = 0, relu(-0.5 - 1) = 0 -> bias only.
  CHECK(f[1] == doctest::Approx(0.5));
  const auto again = m.predict(data);
  CHECK(f == again);
}

TEST_CASE("inactive hinges give a zero subgradient") {
  auto data = margin_data({3.0, 2.0, -2.0}, {1, 1, -1});
  ConstrainedProblem p({}, {RateConstraintSpec::recall_floor(0.9)}, data.group_names());
  const auto g = weighted_subgradient(p, ratecon::testing::identity_model(), LossWeights::from_simplex(Eigen::Vector2d(0.5, 0.5)),
                                      data);
  CHECK(g.gradient.isZero(0.0));
}

TEST_CASE("single example active hinge") {
  // Objective hinge: max(0, 1 - y w.x); gradient -y x (and -y on the bias), scaled by lambda_1.
  auto data = DatasetView::from_arrays((RowMatrix(1, 2) << 0.5, -2).finished(), Eigen::VectorXd::Ones(1),
                                       GroupMatrix(1, 0), {});
  ConstrainedProblem p({}, {RateConstraintSpec::recall_floor(0.5)}, data.group_names());
  const double w0 = 0.3;
  const auto s = weighted_subgradient(p, Model(Architecture::linear(2)), LossWeights::from_simplex(Eigen::Vector2d(w0, 1 - w0)),
                                      data);
  // Proxy for the recall floor: 0.5 - 1 + hinge(1 - f) -> gradient -x as well.
  Eigen::Vector3d expected(-0.5, 2.0, -1.0);
  CHECK((s.gradient - expected).norm() < 1e-14);
}

TEST_CASE("finite differences on random points") {
  std::mt19937_64 rng(42);
  auto data = ratecon::testing::random_data(30, 3, 2, 5);
  ConstrainedProblem p({}, {RateConstraintSpec::recall_floor(0.8), RateConstraintSpec::positive_rate_ratio_floor(0.8, "g0"),
                           RateConstraintSpec::group_fpr_vs_overall("g1", 0.02)},
                       data.group_names(), 0.01);
  for (const Architecture arch : {Architecture::linear(3), Architecture::mlp(3, 5)}) {
    int checked = 0;
    int attempts = 0;
    while (checked < 1000 && attempts < 200000) {
      ++attempts;
      const Eigen::VectorXd theta = ratecon::testing::random_vector(arch.num_params(), rng, 1.5);
      const Model m(arch, theta);
      if (!away_from_kinks(m, data, 1e-3)) continue;
      const Eigen::VectorXd lambda = ratecon::testing::random_simplex(4, rng);
      const LossWeights w = LossWeights::from_simplex(lambda);
      const Eigen::VectorXd g = weighted_subgradient(p, m, w, data, EmptyGroupPolicy::kThrow).gradient;
      Eigen::VectorXd fd(theta.size());
      const double h = 1e-5;
      for (Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd a = theta, b = theta;
        a[i] += h;
        b[i] -= h;
        fd[i] = (loss_at(p, arch, a, w, data) - loss_at(p, arch, b, w, data)) / (2 * h);
      }
      const double rel = (g - fd).lpNorm<Eigen::Infinity>() / std::max(fd.lpNorm<Eigen::Infinity>(), 1e-6);
      CHECK(rel < 1e-4);
      ++checked;
    }
    CHECK(checked == 1000);
  }
}

TEST_CASE("adam steps") {
  AdamOptions o;
  Eigen::VectorXd theta = Eigen::Vector3d(1, 2, 3);
  AdamState fresh(3, o);
  Eigen::VectorXd copy = theta;
  adam_step(fresh, copy, Eigen::VectorXd::Zero(3));
  CHECK(copy == theta);

  AdamState s(3, o);
  const Eigen::Vector3d g(0.5, -2.0, 1e-3);
  Eigen::VectorXd t1 = theta;
  adam_step(s, t1, g);
  for (int i = 0; i < 3; ++i) {
    const double expect = theta[i] - o.step_size * g[i] / (std::abs(g[i]) + o.epsilon);
    CHECK(t1[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  // Constant gradient keeps moving against it.
  Eigen::VectorXd prev = t1;
  for (int k = 0; k < 200; ++k) {
    adam_step(s, t1, g);
    for (int i = 0; i < 3; ++i) CHECK((t1[i] - prev[i]) * g[i] < 0.0);
    prev = t1;
  }
}

TEST_CASE("projection onto the ball") {
  const Eigen::Vector2d v(3, 4);
  CHECK(project_theta(v, 5.0) == v);
  CHECK(project_theta(v, kUnboundedRadius) == v);
  const Eigen::VectorXd q = project_theta(v, 2.5);
  CHECK(q[0] == doctest::Approx(1.5));
  CHECK(q[1] == doctest::Approx(2.0));
  CHECK(project_theta(q, 2.5) == q);
  CHECK(project_theta(Eigen::Vector2d::Zero(), 0.1).isZero(0.0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = ratecon::testing::random_vector(5, rng, 3.0);
    const Eigen::VectorXd once = project_theta(x, 1.0);
    CHECK(project_theta(once, 1.0) == once);
  }
}

TEST_CASE("checkpoint round trip") {
  const Model m = Model::random_init(Architecture::mlp(4, 3), 9);
  std::stringstream buf;
  write_checkpoint(buf, m);
  const Model back = read_checkpoint(buf);
  CHECK(back.architecture() == m.architecture());
  CHECK(back.params() == m.params());
  std::stringstream bad("garbage\n");
  CHECK_THROWS_AS(read_checkpoint(bad), ParseError);
}

TEST_CASE("random init scale and determinism") {
  const Model a = Model::random_init(Architecture::mlp(16, 4), 3);
  const Model b = Model::random_init(Architecture::mlp(16, 4), 3);
  CHECK(a.params() == b.params());
  CHECK(a.params().head(16 * 4 + 4).cwiseAbs().maxCoeff() <= 0.25);
  CHECK(a.params().tail(5).cwiseAbs().maxCoeff() <= 0.5);
}
