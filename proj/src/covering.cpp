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
#include "ratecon/covering.hpp"

#include <cmath>
#include <limits>

#include "ratecon/error.hpp"

namespace ratecon {

namespace {

Eigen::Index lattice_resolution(Eigen::Index m, double radius) {
  return static_cast<Eigen::Index>(std::ceil(static_cast<double>(m + 1) / radius - 1e-12));
}

// C(n, k) in floating point; exact for the sizes we accept.
double binomial(double n, double k) {
  double out = 1.0;
  for (double i = 1.0; i <= k; i += 1.0) out = out * (n - k + i) / i;
  return std::round(out);
}

void check_args(Eigen::Index m, double radius) {
  if (m < 1) throw ContractError("a covering needs m >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ContractError("covering radius must be positive");
}

}  // namespace

double covering_size(Eigen::Index num_constraints, double radius) {
  check_args(num_constraints, radius);
  if (radius >= 2.0) return 1.0;
  const auto k = lattice_resolution(num_constraints, radius);
  return binomial(static_cast<double>(k + num_constraints), static_cast<double>(num_constraints));
}

Covering build_covering(Eigen::Index num_constraints, double radius, std::size_t cap) {
  const double size = covering_size(num_constraints, radius);
  if (size > static_cast<double>(cap)) {
    throw CapacityError("covering needs " + std::to_string(static_cast<long double>(size)) + " centers, cap is " +
                        std::to_string(cap));
  }
  const Eigen::Index m = num_constraints;
  Covering out;
  out.radius = radius;
  out.num_constraints = m;
  if (radius >= 2.0) {
    out.centers.push_back(Eigen::VectorXd::Constant(m + 1, 1.0 / static_cast<double>(m + 1)));
    return out;
  }
  const Eigen::Index k = lattice_resolution(m, radius);
  out.centers.reserve(static_cast<std::size_t>(size));
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(m), 0);
  // Odometer over counts with sum(counts) <= k; the last coordinate moves fastest.
  while (true) {
    Eigen::Index used = 0;
    Eigen::VectorXd center(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      center[i] = static_cast<double>(counts[i]) / static_cast<double>(k);
      used += counts[i];
    }
    center[m] = static_cast<double>(k - used) / static_cast<double>(k);
    out.centers.push_back(std::move(center));

    Eigen::Index pos = m - 1;
    while (pos >= 0) {
      ++counts[pos];
      Eigen::Index total = 0;
      for (auto c : counts) total += c;
      if (total <= k) break;
      counts[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

std::pair<std::size_t, const Eigen::VectorXd*> nearest_center(const Covering& covering, const Eigen::VectorXd& lambda) {
  if (covering.centers.empty()) throw ContractError("empty covering");
  if (lambda.size() != covering.num_constraints + 1) throw ContractError("lambda does not match the covering");
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < covering.centers.size(); ++i) {
    const double d = (covering.centers[i] - lambda).lpNorm<1>();
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return {best, &covering.centers[best]};
}

}  // namespace ratecon
