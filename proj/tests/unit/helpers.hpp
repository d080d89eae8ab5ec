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

#include <random>
#include <string>
#include <vector>

#include "ratecon/dataset.hpp"
#include "ratecon/model.hpp"

namespace ratecon::testing {

// One feature per example equal to the desired margin; pair with identity_model().
inline DatasetView margin_data(const std::vector<double>& f, const std::vector<double>& y,
                               const std::vector<std::vector<int>>& groups = {},
                               const std::vector<std::string>& names = {}) {
  const auto n = static_cast<Index>(f.size());
  RowMatrix x(n, 1);
  Eigen::VectorXd labels(n);
  GroupMatrix g(n, static_cast<Index>(names.size()));
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = f[i];
    labels[i] = y[i];
    for (std::size_t k = 0; k < names.size(); ++k) g(i, static_cast<Index>(k)) = static_cast<std::uint8_t>(groups[i][k]);
  }
  return DatasetView::from_arrays(std::move(x), std::move(labels), std::move(g), names);
}

inline Model identity_model() {
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  return Model(Architecture::linear(1), p);
}

// Gaussian features, labels from a noisy linear rule, random group bits.
inline DatasetView random_data(Index n, Index d, Index groups, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  RowMatrix x(n, d);
  Eigen::VectorXd y(n);
  GroupMatrix g(n, groups);
  for (Index i = 0; i < n; ++i) {
    double score = 0.0;
    for (Index j = 0; j < d; ++j) {
      x(i, j) = normal(rng);
      score += x(i, j) * (j % 2 == 0 ? 1.0 : -0.5);
    }
    y[i] = score + 0.5 * normal(rng) > 0.0 ? 1.0 : -1.0;
    for (Index k = 0; k < groups; ++k) g(i, k) = coin(rng) ? 1 : 0;
  }
  // Make sure every group / label combination is populated.
  for (Index k = 0; k < groups && n >= 4; ++k) {
    for (Index i = 0; i < 4; ++i) g(i, k) = 1;
    y[0] = 1.0;
    y[1] = -1.0;
  }
  std::vector<std::string> names;
  for (Index k = 0; k < groups; ++k) names.push_back("g" + std::to_string(k));
  return DatasetView::from_arrays(std::move(x), std::move(y), std::move(g), names);
}

inline Eigen::VectorXd random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Eigen::VectorXd random_simplex(Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = e(rng);
  return v / v.sum();
}

}  // namespace ratecon::testing
