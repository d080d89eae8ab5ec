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

#include <cstddef>
#include <utility>
#include <vector>

namespace ratecon {

// Radius-r covering of the (m+1)-simplex in the 1-norm.
struct Covering {
  double radius = 0.0;
  Eigen::Index num_constraints = 0;  // m
  std::vector<Eigen::VectorXd> centers;  // each of length m+1

  std::size_t size() const { return centers.size(); }
};

inline constexpr std::size_t kDefaultCoveringCap = 1000000;

// Grid on the nonnegative orthant of the m-dimensional 1-norm ball with
// per-coordinate spacing 1/K, K = ceil((m+1)/r), each point lifted by
// appending 1 - ||lambda~||_1. For r >= 2 the barycenter alone is returned.
// Centers are enumerated in lexicographic order of their first m
// coordinates. Throws CapacityError when more than cap centers are needed.
Covering build_covering(Eigen::Index num_constraints, double radius, std::size_t cap = kDefaultCoveringCap);

// Number of centers build_covering would produce, without enumerating them.
double covering_size(Eigen::Index num_constraints, double radius);

// Nearest center in the 1-norm; ties go to the lowest index.
std::pair<std::size_t, const Eigen::VectorXd*> nearest_center(const Covering& covering, const Eigen::VectorXd& lambda);

}  // namespace ratecon
