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
#include "ratecon/dataset.hpp"

#include <numeric>

#include "ratecon/error.hpp"

namespace ratecon {

const char* to_string(Role role) {
  switch (role) {
    case Role::kTrain: return "train";
    case Role::kVal: return "val";
    case Role::kTest: return "test";
    case Role::kAll: return "all";
  }
  return "?";
}

DatasetView DatasetView::from_arrays(RowMatrix features, Eigen::VectorXd labels, GroupMatrix groups,
                                     std::vector<std::string> group_names, Role role) {
  const Index n = features.rows();
  if (n < 1) throw SchemaError("dataset must contain at least one example");
  if (labels.size() != n) throw SchemaError("label count does not match feature rows");
  if (groups.size() == 0) groups.resize(n, static_cast<Index>(group_names.size()));
  if (groups.rows() != n) throw SchemaError("group membership rows do not match feature rows");
  if (groups.cols() != static_cast<Index>(group_names.size()))
    throw SchemaError("group membership columns do not match group names");
  for (Index i = 0; i < n; ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) throw SchemaError("labels must be -1 or +1");
  }
  if (!features.allFinite()) throw SchemaError("features must be finite");
  for (Index i = 0; i < groups.size(); ++i) {
    if (groups.data()[i] > 1) throw SchemaError("group memberships must be 0 or 1");
  }
  auto storage = std::make_shared<DatasetStorage>();
  storage->features = std::move(features);
  storage->labels = std::move(labels);
  storage->groups = std::move(groups);
  storage->group_names = std::move(group_names);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  return DatasetView(std::move(storage), std::move(rows), role);
}

Index DatasetView::group_index(const std::string& name) const {
  const auto& names = storage_->group_names;
  for (std::size_t g = 0; g < names.size(); ++g) {
    if (names[g] == name) return static_cast<Index>(g);
  }
  return -1;
}

RowMatrix DatasetView::gather_features() const {
  RowMatrix out(size(), dim());
  for (Index k = 0; k < size(); ++k) out.row(k) = storage_->features.row(rows_[k]);
  return out;
}

DatasetView DatasetView::subset(std::span<const Index> positions, Role role) const {
  std::vector<Index> rows;
  rows.reserve(positions.size());
  for (Index p : positions) {
    if (p < 0 || p >= size()) throw ContractError("subset position out of range");
    rows.push_back(rows_[p]);
  }
  return DatasetView(storage_, std::move(rows), role);
}

DatasetView DatasetView::with_role(Role role) const { return DatasetView(storage_, rows_, role); }

DatasetView DatasetView::concat(const DatasetView& a, const DatasetView& b, Role role) {
  if (a.storage_ != b.storage_) throw ContractError("cannot concatenate views over different storage");
  std::vector<Index> rows = a.rows_;
  rows.insert(rows.end(), b.rows_.begin(), b.rows_.end());
  return DatasetView(a.storage_, std::move(rows), role);
}

}  // namespace ratecon
