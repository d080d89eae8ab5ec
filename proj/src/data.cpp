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
#include "ratecon/data.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ratecon/error.hpp"
#include "ratecon/log.hpp"
#include "ratecon/random.hpp"

namespace ratecon {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& cell, const std::string& column, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw ParseError("row " + std::to_string(row) + ": column '" + column + "' is not a number: '" + cell + "'");
  }
  return v;
}

// Draws n points from the two-component mixture; returns (points, component is positive).
std::pair<RowMatrix, std::vector<bool>> draw_mixture(const SimulatedSpec& spec, Rng& rng) {
  const Eigen::Matrix2d chol = spec.covariance.llt().matrixL();
  std::bernoulli_distribution coin(spec.positive_probability);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix z(spec.n, 2);
  std::vector<bool> positive(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    const bool pos = coin(rng);
    positive[i] = pos;
    Eigen::Vector2d e;
    e[0] = normal(rng);
    e[1] = normal(rng);
    const Eigen::Vector2d point = (pos ? spec.mean_positive : spec.mean_negative) + chol * e;
    z.row(i) = point.transpose();
  }
  return {std::move(z), std::move(positive)};
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ParseError("truncated dataset cache");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

// Preprocessing fitted on the training rows.
struct FittedFeature {
  FeatureSpec spec;
  Index column = -1;
  std::vector<std::string> categories;  // kOneHot
  std::vector<double> edges;            // kBucketize
  double threshold = 0.0;               // kThreshold
};

struct FittedGroup {
  GroupSpec spec;
  Index column = -1;
  double threshold = 0.0;
};

Index require_column(const CsvTable& table, const std::string& name) {
  const Index c = table.column(name);
  if (c < 0) throw SchemaError("column '" + name + "' not found");
  return c;
}

}  // namespace

void SimulatedSpec::validate() const {
  if (n < 2) throw ContractError("simulated data needs n >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractError("sigma must be positive");
  if (!(positive_probability > 0.0 && positive_probability < 1.0)) {
    throw ContractError("positive probability must lie in (0, 1)");
  }
  Eigen::LLT<Eigen::Matrix2d> llt(covariance);
  if (llt.info() != Eigen::Success) throw ContractError("covariance must be positive definite");
}

RowMatrix rbf_features(const Eigen::Ref<const RowMatrix>& z, const Eigen::Ref<const RowMatrix>& w, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("sigma must be positive");
  if (z.cols() != w.cols()) throw SchemaError("points and anchors have different dimensions");
  RowMatrix x(z.rows(), w.rows());
  const double scale = 1.0 / (2.0 * sigma * sigma);
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < w.rows(); ++j) x(i, j) = std::exp(-(z.row(i) - w.row(j)).squaredNorm() * scale);
  }
  return x;
}

ThreeWaySplit generate_simulated(const SimulatedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  auto [z, positive] = draw_mixture(spec, rng);
  auto [w, unused] = draw_mixture(spec, rng);
  (void)unused;
  RowMatrix x = rbf_features(z, w, spec.sigma);
  Eigen::VectorXd y(spec.n);
  for (Index i = 0; i < spec.n; ++i) y[i] = positive[i] ? 1.0 : -1.0;
  DatasetView all = DatasetView::from_arrays(std::move(x), std::move(y), GroupMatrix(spec.n, 0), {});

  std::vector<Index> order(static_cast<std::size_t>(spec.n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng split_rng(spec.split_seed);
  std::shuffle(order.begin(), order.end(), split_rng);
  const Index third = spec.n / 3;
  std::vector<Index> a(order.begin(), order.begin() + third);
  std::vector<Index> b(order.begin() + third, order.begin() + 2 * third);
  std::vector<Index> c(order.begin() + 2 * third, order.end());
  return {all.subset(a, Role::kTrain), all.subset(b, Role::kVal), all.subset(c, Role::kTest)};
}

Index CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  auto finish_record = [&]() {
    record.push_back(trim(cell));
    cell.clear();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw ParseError(source + ": row " + std::to_string(table.rows.size() + 1) + " (line " +
                           std::to_string(line) + ") has " + std::to_string(record.size()) + " cells, expected " +
                           std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(record));
      }
    }
    record.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        cell += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      record.push_back(trim(cell));
      cell.clear();
      any = true;
    } else if (ch == '\n') {
      finish_record();
      ++line;
    } else {
      cell += ch;
      any = true;
    }
  }
  if (quoted) throw ParseError(source + ": unterminated quoted field");
  if (any || !cell.empty()) finish_record();
  if (table.header.empty()) throw ParseError(source + ": empty CSV");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path);
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw ContractError("percentile of an empty sample");
  if (!(percentile >= 0.0 && percentile <= 100.0)) throw ContractError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

void TabularSpec::validate() const {
  if (label.column.empty()) throw ContractError("tabular spec needs a label column");
  if (label.positive_values.empty() && !label.percentile_at_least) {
    throw ContractError("label needs positive values or a percentile rule");
  }
  if (features.empty()) throw ContractError("tabular spec needs at least one feature");
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (g.name.empty() || !names.insert(g.name).second) throw ContractError("group names must be unique and nonempty");
  }
  for (const auto& f : features) {
    if (f.kind == FeatureKind::kBucketize && f.buckets < 2) throw ContractError("bucketize needs at least 2 buckets");
  }
}

TabularData load_tabular(const TabularSpec& spec) {
  const CsvTable train = read_csv(spec.path);
  if (spec.test_path.empty()) return load_tabular(spec, train, nullptr);
  const CsvTable test = read_csv(spec.test_path);
  return load_tabular(spec, train, &test);
}

TabularData load_tabular(const TabularSpec& spec, const CsvTable& train, const CsvTable* test) {
  spec.validate();
  std::vector<Index> used;
  const Index label_col = require_column(train, spec.label.column);
  used.push_back(label_col);

  std::vector<FittedFeature> features;
  for (const auto& f : spec.features) {
    features.push_back({f, require_column(train, f.column), {}, {}, 0.0});
    used.push_back(features.back().column);
  }
  std::vector<FittedGroup> groups;
  for (const auto& g : spec.groups) {
    groups.push_back({g, require_column(train, g.column), 0.0});
    used.push_back(groups.back().column);
  }
  if (test) {
    for (const auto& name : train.header) {
      if (test->column(name) < 0 &&
          std::find(used.begin(), used.end(), train.column(name)) != used.end()) {
        throw SchemaError("test file lacks column '" + name + "'");
      }
    }
  }

  auto keep_rows = [&](const CsvTable& table, Index& dropped) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      bool missing = false;
      for (auto c : used) {
        const auto& cell = table.rows[r][table.column(train.header[c])];
        if (cell.empty() || cell == spec.missing_token) missing = true;
      }
      if (missing) {
        ++dropped;
      } else {
        keep.push_back(r);
      }
    }
    return keep;
  };

  TabularData out;
  const auto train_rows = keep_rows(train, out.dropped_rows);
  if (train_rows.empty()) throw SchemaError("no complete rows in the training file");

  auto column_numbers = [&](Index c) {
    std::vector<double> v;
    for (auto r : train_rows) v.push_back(parse_number(train.rows[r][c], train.header[c], r + 1));
    return v;
  };

  for (auto& f : features) {
    switch (f.spec.kind) {
      case FeatureKind::kNumeric: break;
      case FeatureKind::kOneHot: {
        std::set<std::string> seen;
        for (auto r : train_rows) seen.insert(train.rows[r][f.column]);
        f.categories.assign(seen.begin(), seen.end());
        break;
      }
      case FeatureKind::kBucketize: {
        const auto values = column_numbers(f.column);
        for (int k = 1; k < f.spec.buckets; ++k) {
          const double e = nearest_rank_percentile(values, 100.0 * k / f.spec.buckets);
          if (f.edges.empty() || e > f.edges.back()) f.edges.push_back(e);
        }
        // Edges equal to the minimum would leave the first bucket empty.
        const double lowest = *std::min_element(values.begin(), values.end());
        f.edges.erase(std::remove_if(f.edges.begin(), f.edges.end(), [&](double e) { return e <= lowest; }),
                      f.edges.end());
        break;
      }
      case FeatureKind::kThreshold:
        f.threshold = nearest_rank_percentile(column_numbers(f.column), f.spec.percentile);
        break;
    }
    const auto& name = f.spec.column;
    switch (f.spec.kind) {
      case FeatureKind::kNumeric: out.feature_names.push_back(name); break;
      case FeatureKind::kOneHot:
        for (const auto& cat : f.categories) out.feature_names.push_back(name + "=" + cat);
        break;
      case FeatureKind::kBucketize:
        for (std::size_t b = 0; b <= f.edges.size(); ++b) out.feature_names.push_back(name + "#" + std::to_string(b));
        break;
      case FeatureKind::kThreshold: out.feature_names.push_back(name + ">=p"); break;
    }
  }
  for (auto& g : groups) {
    if (g.spec.op == GroupOp::kPercentileAtLeast || g.spec.op == GroupOp::kPercentileBelow) {
      g.threshold = nearest_rank_percentile(column_numbers(g.column), g.spec.number);
    } else {
      g.threshold = g.spec.number;
    }
  }
  double label_threshold = 0.0;
  if (spec.label.percentile_at_least) {
    label_threshold = nearest_rank_percentile(column_numbers(label_col), *spec.label.percentile_at_least);
  }

  std::vector<std::string> group_names;
  for (const auto& g : groups) group_names.push_back(g.spec.name);
  const auto dim = static_cast<Index>(out.feature_names.size());

  auto build = [&](const CsvTable& table, const std::vector<std::size_t>& rows, Role role) {
    auto col = [&](Index train_col) { return table.column(train.header[train_col]); };
    const auto n = static_cast<Index>(rows.size());
    RowMatrix x = RowMatrix::Zero(n, dim);
    Eigen::VectorXd y(n);
    GroupMatrix gm = GroupMatrix::Zero(n, static_cast<Index>(groups.size()));
    for (Index i = 0; i < n; ++i) {
      const auto& row = table.rows[rows[i]];
      const std::size_t line = rows[i] + 1;
      Index j = 0;
      for (const auto& f : features) {
        const auto& cell = row[col(f.column)];
        switch (f.spec.kind) {
          case FeatureKind::kNumeric: x(i, j++) = parse_number(cell, f.spec.column, line); break;
          case FeatureKind::kOneHot: {
            auto it = std::lower_bound(f.categories.begin(), f.categories.end(), cell);
            if (it != f.categories.end() && *it == cell) x(i, j + (it - f.categories.begin())) = 1.0;
            j += static_cast<Index>(f.categories.size());
            break;
          }
          case FeatureKind::kBucketize: {
            const double v = parse_number(cell, f.spec.column, line);
            const auto bucket = std::upper_bound(f.edges.begin(), f.edges.end(), v) - f.edges.begin();
            x(i, j + bucket) = 1.0;
            j += static_cast<Index>(f.edges.size()) + 1;
            break;
          }
          case FeatureKind::kThreshold:
            x(i, j++) = parse_number(cell, f.spec.column, line) >= f.threshold ? 1.0 : 0.0;
            break;
        }
      }
      const auto& label_cell = row[col(label_col)];
      bool positive = false;
      if (spec.label.percentile_at_least) {
        positive = parse_number(label_cell, spec.label.column, line) >= label_threshold;
      } else {
        positive = std::find(spec.label.positive_values.begin(), spec.label.positive_values.end(), label_cell) !=
                   spec.label.positive_values.end();
      }
      y[i] = positive ? 1.0 : -1.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& gs = groups[g];
        const auto& cell = row[col(gs.column)];
        bool member = false;
        switch (gs.spec.op) {
          case GroupOp::kEquals: member = cell == gs.spec.value; break;
          case GroupOp::kNotEquals: member = cell != gs.spec.value; break;
          case GroupOp::kGreaterEqual:
          case GroupOp::kPercentileAtLeast:
            member = parse_number(cell, gs.spec.column, line) >= gs.threshold;
            break;
          case GroupOp::kLess:
          case GroupOp::kPercentileBelow:
            member = parse_number(cell, gs.spec.column, line) < gs.threshold;
            break;
        }
        gm(i, static_cast<Index>(g)) = member ? 1 : 0;
      }
    }
    return DatasetView::from_arrays(std::move(x), std::move(y), std::move(gm), group_names, role);
  };

  out.train = build(train, train_rows, Role::kAll);
  if (test) {
    const auto test_rows = keep_rows(*test, out.dropped_rows);
    if (test_rows.empty()) throw SchemaError("no complete rows in the test file");
    out.test = build(*test, test_rows, Role::kTest);
  }
  if (out.dropped_rows > 0) {
    log::get().info("dropped {} rows with missing values", out.dropped_rows);
  }
  log::get().info("loaded {} training rows, {} features, {} groups", out.train.size(), dim, groups.size());
  return out;
}

DatasetSplit split(const DatasetView& data, SplitMode mode, std::uint64_t seed) {
  if (data.empty()) throw ContractError("cannot split an empty dataset");
  if (mode == SplitMode::kOneDataset) return {data.with_role(Role::kTrain), data.with_role(Role::kVal)};
  if (data.size() < 2) throw ContractError("two-dataset split needs at least two examples");
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const Index half = (data.size() + 1) / 2;
  std::vector<Index> a(order.begin(), order.begin() + half);
  std::vector<Index> b(order.begin() + half, order.end());
  return {data.subset(a, Role::kTrain), data.subset(b, Role::kVal)};
}

void write_dataset_cache(const std::string& path, const DatasetView& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const Index n = data.size();
  const Index d = data.dim();
  const Index g = data.num_groups();
  out << "ratecon-dataset v1\n";
  put_u64(out, static_cast<std::uint64_t>(n));
  put_u64(out, static_cast<std::uint64_t>(d));
  put_u64(out, static_cast<std::uint64_t>(g));
  for (const auto& name : data.group_names()) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) put_u64(out, std::bit_cast<std::uint64_t>(data.row(i)[j]));
  }
  for (Index i = 0; i < n; ++i) out.put(static_cast<char>(data.label(i) > 0.0 ? 1 : -1));
  const Index bits = n * g;
  std::vector<unsigned char> packed(static_cast<std::size_t>((bits + 7) / 8), 0);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < g; ++k) {
      if (data.in_group(i, k)) {
        const Index bit = i * g + k;
        packed[bit / 8] |= static_cast<unsigned char>(1u << (bit % 8));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!out) throw Error("failed to write " + path);
}

DatasetView read_dataset_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string magic;
  if (!std::getline(in, magic) || magic != "ratecon-dataset v1") throw ParseError(path + ": not a dataset cache");
  const auto n = static_cast<Index>(get_u64(in));
  const auto d = static_cast<Index>(get_u64(in));
  const auto g = static_cast<Index>(get_u64(in));
  if (n < 1 || d < 0 || g < 0 || n > (Index{1} << 32) || d > (Index{1} << 24) || g > (Index{1} << 16)) {
    throw ParseError(path + ": implausible sizes");
  }
  std::vector<std::string> names;
  for (Index k = 0; k < g; ++k) {
    const auto len = get_u64(in);
    if (len > 4096) throw ParseError(path + ": group name too long");
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    names.push_back(std::move(name));
  }
  RowMatrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = std::bit_cast<double>(get_u64(in));
  }
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const int c = in.get();
    if (!in) throw ParseError(path + ": truncated labels");
    y[i] = static_cast<signed char>(c) > 0 ? 1.0 : -1.0;
  }
  const Index bits = n * g;
  std::vector<unsigned char> packed(static_cast<std::size_t>((bits + 7) / 8));
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!in && !packed.empty()) throw ParseError(path + ": truncated group bitmap");
  GroupMatrix groups(n, g);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < g; ++k) {
      const Index bit = i * g + k;
      groups(i, k) = (packed[bit / 8] >> (bit % 8)) & 1u;
    }
  }
  return DatasetView::from_arrays(std::move(x), std::move(y), std::move(groups), std::move(names));
}

}  // namespace ratecon
