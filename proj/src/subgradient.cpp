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
#include "ratecon/subgradient.hpp"

namespace ratecon {

SurrogateGradient weighted_subgradient(const ConstrainedProblem& problem, const Model& model,
                                       const LossWeights& weights, const DatasetView& batch,
                                       EmptyGroupPolicy policy) {
  const Eigen::VectorXd f = model.predict(batch);
  const auto s = margins::weighted_surrogate(problem, f, batch, weights, policy);
  SurrogateGradient out;
  out.value = s.value;
  out.gradient = model.backprop(batch, s.dvalue_dmargin);
  if (problem.l2() > 0.0) {
    const double total = weights.objective + weights.constraints.sum();
    out.value += total * 0.5 * problem.l2() * model.params().squaredNorm();
    out.gradient += total * problem.l2() * model.params();
  }
  return out;
}

}  // namespace ratecon
