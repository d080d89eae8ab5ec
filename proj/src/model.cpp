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
#include "ratecon/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "ratecon/error.hpp"

namespace ratecon {

Index Architecture::num_params() const {
  if (input_dim < 1 || hidden_units < 0) throw ContractError("invalid architecture");
  if (is_linear()) return input_dim + 1;
  return hidden_units * input_dim + hidden_units + hidden_units + 1;
}

std::string Architecture::describe() const {
  std::ostringstream out;
  if (is_linear()) {
    out << "linear(" << input_dim << ")";
  } else {
    out << "mlp(" << input_dim << "," << hidden_units << ")";
  }
  return out.str();
}

Model::Model(Architecture arch) : arch_(arch), params_(Eigen::VectorXd::Zero(arch.num_params())) {}

Model::Model(Architecture arch, Eigen::VectorXd params) : arch_(arch), params_(std::move(params)) {
  if (params_.size() != arch_.num_params()) throw SchemaError("parameter count does not match architecture");
  if (!params_.allFinite()) throw NumericError("non-finite model parameters");
}

Model Model::random_init(Architecture arch, std::uint64_t seed) {
  Model model(arch);
  std::mt19937_64 rng(seed);
  auto fill = [&](Index offset, Index count, double fan_in) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
    for (Index i = 0; i < count; ++i) model.params_[offset + i] = dist(rng);
  };
  const Index d = arch.input_dim;
  if (arch.is_linear()) {
    fill(0, d + 1, static_cast<double>(d));
  } else {
    const Index h = arch.hidden_units;
    fill(0, h * d + h, static_cast<double>(d));
    fill(h * d + h, h + 1, static_cast<double>(h));
  }
  return model;
}

void Model::check_input(const DatasetView& data) const {
  if (data.dim() != arch_.input_dim) {
    throw SchemaError("model expects " + std::to_string(arch_.input_dim) + " features, data has " +
                      std::to_string(data.dim()));
  }
}

double Model::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const Index d = arch_.input_dim;
  if (x.size() != d) throw SchemaError("feature vector has the wrong dimension");
  if (arch_.is_linear()) return x.dot(params_.head(d)) + params_[d];
  const Index h = arch_.hidden_units;
  double out = params_[h * d + 2 * h];
  for (Index j = 0; j < h; ++j) {
    const double z = x.dot(params_.segment(j * d, d)) + params_[h * d + j];
    if (z > 0.0) out += params_[h * d + h + j] * z;
  }
  return out;
}

Eigen::VectorXd Model::predict(const DatasetView& data) const {
  check_input(data);
  Eigen::VectorXd f(data.size());
  for (Index k = 0; k < data.size(); ++k) f[k] = predict_one(data.row(k));
  return f;
}

RowMatrix Model::hidden_preactivations(const DatasetView& data) const {
  check_input(data);
  if (arch_.is_linear()) return RowMatrix();
  const Index d = arch_.input_dim;
  const Index h = arch_.hidden_units;
  RowMatrix z(data.size(), h);
  for (Index k = 0; k < data.size(); ++k) {
    for (Index j = 0; j < h; ++j) z(k, j) = data.row(k).dot(params_.segment(j * d, d)) + params_[h * d + j];
  }
  return z;
}

Eigen::VectorXd Model::backprop(const DatasetView& data, const Eigen::VectorXd& dloss_dmargin) const {
  check_input(data);
  if (dloss_dmargin.size() != data.size()) throw SchemaError("gradient length does not match dataset size");
  const Index d = arch_.input_dim;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  if (arch_.is_linear()) {
    for (Index k = 0; k < data.size(); ++k) {
      const double a = dloss_dmargin[k];
      if (a == 0.0) continue;
      grad.head(d) += a * data.row(k).transpose();
      grad[d] += a;
    }
    return grad;
  }
  const Index h = arch_.hidden_units;
  const Index b1 = h * d;
  const Index w2 = b1 + h;
  const Index b2 = w2 + h;
  for (Index k = 0; k < data.size(); ++k) {
    const double a = dloss_dmargin[k];
    if (a == 0.0) continue;
    const auto x = data.row(k);
    grad[b2] += a;
    for (Index j = 0; j < h; ++j) {
      const double z = x.dot(params_.segment(j * d, d)) + params_[b1 + j];
      if (z <= 0.0) continue;
      grad[w2 + j] += a * z;
      const double back = a * params_[w2 + j];
      grad.segment(j * d, d) += back * x.transpose();
      grad[b1 + j] += back;
    }
  }
  return grad;
}

void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  if (grad.size() != theta.size()) throw ContractError("gradient and parameter sizes differ");
  if (!grad.allFinite()) throw NumericError("non-finite gradient in ADAM step");
  if (state.first_moment.size() != theta.size()) {
    state.first_moment = Eigen::VectorXd::Zero(theta.size());
    state.second_moment = Eigen::VectorXd::Zero(theta.size());
    state.step = 0;
  }
  const auto& o = state.options;
  ++state.step;
  state.first_moment = o.beta1 * state.first_moment + (1.0 - o.beta1) * grad;
  state.second_moment = o.beta2 * state.second_moment + (1.0 - o.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  theta.array() -= o.step_size * (state.first_moment.array() / c1) /
                   ((state.second_moment.array() / c2).sqrt() + o.epsilon);
}

Eigen::VectorXd project_theta(const Eigen::VectorXd& theta, double radius) {
  if (!(radius > 0.0)) throw ContractError("projection radius must be positive");
  if (std::isinf(radius)) return theta;
  const double norm = theta.norm();
  if (norm <= radius) return theta;
  Eigen::VectorXd out = theta * (radius / norm);
  // Rounding can leave the result a hair outside; shrink until it is inside so
  // that projecting twice is a no-op.
  while (out.norm() > radius) out *= 1.0 - 1e-15;
  return out;
}

namespace {

void put_double(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_double(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw ParseError("truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  const auto& a = model.architecture();
  out << "ratecon-model v1 " << a.input_dim << " " << a.hidden_units << " " << model.num_params() << "\n";
  for (Index i = 0; i < model.num_params(); ++i) put_double(out, model.params()[i]);
  if (!out) throw Error("failed to write checkpoint");
}

Model read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty checkpoint");
  std::istringstream header(line);
  std::string magic, version;
  Index d = 0, h = 0, n = 0;
  if (!(header >> magic >> version >> d >> h >> n) || magic != "ratecon-model" || version != "v1") {
    throw ParseError("bad checkpoint header");
  }
  Architecture arch{d, h};
  if (d < 1 || h < 0 || n != arch.num_params()) throw ParseError("checkpoint header is inconsistent");
  Eigen::VectorXd params(n);
  for (Index i = 0; i < n; ++i) params[i] = get_double(in);
  return Model(arch, std::move(params));
}

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_checkpoint(out, model);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace ratecon
