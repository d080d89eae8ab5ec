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

#include "ratecon/dataset.hpp"
#include "ratecon/model.hpp"
#include "ratecon/problem.hpp"

namespace ratecon {

struct SurrogateGradient {
  double value = 0.0;  // includes the l2 term
  Eigen::VectorXd gradient;
};

// Subgradient in theta of the weighted hinge objective plus proxies on a
// batch, including (mu/2)||theta||^2 scaled by the total weight when the
// problem carries an l2 term.
SurrogateGradient weighted_subgradient(const ConstrainedProblem& problem, const Model& model,
                                       const LossWeights& weights, const DatasetView& batch,
                                       EmptyGroupPolicy policy = EmptyGroupPolicy::kSkip);

}  // namespace ratecon
