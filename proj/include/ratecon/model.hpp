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

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "ratecon/dataset.hpp"

namespace ratecon {

// Linear scorer when hidden_units == 0, otherwise a one-hidden-layer ReLU
// network. Both carry an explicit bias, stored inside the flat vector.
struct Architecture {
  Index input_dim = 0;
  Index hidden_units = 0;

  static Architecture linear(Index input_dim) { return {input_dim, 0}; }
  static Architecture mlp(Index input_dim, Index hidden) { return {input_dim, hidden}; }

  bool is_linear() const { return hidden_units == 0; }
  Index num_params() const;
  std::string describe() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Flat parameter vector plus the architecture that interprets it.
//
// Linear layout:  [w (d), b]
// MLP layout:     [W1 (h x d, row-major), b1 (h), w2 (h), b2]
class Model {
 public:
  Model() = default;
  explicit Model(Architecture arch);  // all-zero parameters
  Model(Architecture arch, Eigen::VectorXd params);

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  static Model random_init(Architecture arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& mutable_params() { return params_; }
  Index num_params() const { return params_.size(); }

  // Real-valued scores f(x; theta); an example is predicted positive iff f > 0.
  Eigen::VectorXd predict(const DatasetView& data) const;
  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  // Chain rule through the network: returns sum_k dloss_dmargin[k] * df(x_k)/dtheta.
  Eigen::VectorXd backprop(const DatasetView& data, const Eigen::VectorXd& dloss_dmargin) const;

  // Pre-activations of the hidden layer, n x h (empty for linear models).
  RowMatrix hidden_preactivations(const DatasetView& data) const;

 private:
  void check_input(const DatasetView& data) const;

  Architecture arch_;
  Eigen::VectorXd params_;
};

struct AdamOptions {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;
  AdamOptions options;

  AdamState() = default;
  AdamState(Index dim, AdamOptions opts)
      : first_moment(Eigen::VectorXd::Zero(dim)), second_moment(Eigen::VectorXd::Zero(dim)), options(opts) {}
};

// Bias-corrected ADAM step; updates the state and theta in place.
void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad);

inline constexpr double kUnboundedRadius = std::numeric_limits<double>::infinity();

// Euclidean projection onto the 2-norm ball of the given radius.
Eigen::VectorXd project_theta(const Eigen::VectorXd& theta, double radius);

// Checkpoint: one text header line describing the architecture, then the
// parameters as little-endian IEEE-754 doubles.
void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace ratecon
