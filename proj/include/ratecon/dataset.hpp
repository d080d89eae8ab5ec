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
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ratecon {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using GroupMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Role { kTrain, kVal, kTest, kAll };

const char* to_string(Role role);

// Immutable example store shared by every view cut from it.
struct DatasetStorage {
  RowMatrix features;                   // n x d
  Eigen::VectorXd labels;               // entries in {-1, +1}
  GroupMatrix groups;                   // n x G, 0/1 membership bits
  std::vector<std::string> group_names;  // size G
};

// A row subset of a shared DatasetStorage. Copying a view never copies
// examples; minibatches and splits are views as well.
class DatasetView {
 public:
  DatasetView() = default;

  // Validates and takes ownership of the arrays; the view covers every row.
  static DatasetView from_arrays(RowMatrix features, Eigen::VectorXd labels, GroupMatrix groups,
                                 std::vector<std::string> group_names, Role role = Role::kAll);

  Index size() const { return static_cast<Index>(rows_.size()); }
  Index dim() const { return storage_ ? storage_->features.cols() : 0; }
  Index num_groups() const { return storage_ ? storage_->groups.cols() : 0; }
  Role role() const { return role_; }
  bool empty() const { return rows_.empty(); }

  auto row(Index k) const { return storage_->features.row(rows_[k]); }
  double label(Index k) const { return storage_->labels[rows_[k]]; }
  bool in_group(Index k, Index group) const { return storage_->groups(rows_[k], group) != 0; }

  const std::vector<std::string>& group_names() const { return storage_->group_names; }
  // Returns the column index of a named group, or -1.
  Index group_index(const std::string& name) const;

  // Storage row ids covered by this view, in view order.
  const std::vector<Index>& rows() const { return rows_; }
  const DatasetStorage& storage() const { return *storage_; }
  const std::shared_ptr<const DatasetStorage>& shared_storage() const { return storage_; }

  // Gathers the covered feature rows into a dense matrix.
  RowMatrix gather_features() const;

  // Sub-view built from positions into this view (not storage row ids).
  DatasetView subset(std::span<const Index> positions, Role role) const;
  DatasetView subset(std::span<const Index> positions) const { return subset(positions, role_); }
  DatasetView with_role(Role role) const;

  // Concatenation of two views over the same storage, e.g. train u val.
  static DatasetView concat(const DatasetView& a, const DatasetView& b, Role role);

 private:
  DatasetView(std::shared_ptr<const DatasetStorage> storage, std::vector<Index> rows, Role role)
      : storage_(std::move(storage)), rows_(std::move(rows)), role_(role) {}

  std::shared_ptr<const DatasetStorage> storage_;
  std::vector<Index> rows_;
  Role role_ = Role::kAll;
};

}  // namespace ratecon
