#ifndef SARW_DATASET_HPP_
#define SARW_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sarw/common.hpp"
#include "sarw/csv.hpp"

namespace sarw {

//! A spatial regression problem instance: y (n), X (n x p), optional n x 2 coordinates.
struct Dataset {
  Vector y;
  Matrix x;
  std::optional<Matrix> coords;
  std::vector<std::string> ids;
  std::vector<std::string> column_names;
  std::string dependent_name = "y";
  std::vector<std::string> transforms;  //!< e.g. "log(MEDV)", applied in order

  Index n() const { return y.size(); }
  Index p() const { return x.cols(); }

  //! Row index of an id, or nullopt.
  std::optional<Index> index_of(const std::string& id) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<Index>(it - ids.begin());
  }

  std::optional<Index> column_index(const std::string& name) const {
    const auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<Index>(it - column_names.begin());
  }

  //! Throws unless the Dataset invariants hold (finite values, n >= 2, p >= 1, unique ids).
  void validate() const {
    require(y.size() >= 2, "dataset", "fewer than 2 usable rows");
    require(x.rows() == y.size(), "dataset", "X and y row counts differ");
    require(x.cols() >= 1, "dataset", "at least one explanatory column is required");
    require(static_cast<Index>(ids.size()) == y.size(), "dataset", "id count differs from row count");
    require(static_cast<Index>(column_names.size()) == x.cols(), "dataset", "column name count differs from p");
    require(y.allFinite(), "dataset", "y has non-finite entries");
    require(x.allFinite(), "dataset", "X has non-finite entries");
    if (coords) {
      require(coords->rows() == y.size() && coords->cols() == 2, "dataset", "coords must be n x 2");
      require(coords->allFinite(), "dataset", "coords have non-finite entries");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw Error("dataset", "duplicate id '" + id + "'");
    }
  }

  //! Rows `idx` of this dataset, in the given order.
  Dataset subset(std::span<const Index> idx) const {
    Dataset out;
    const Index m = static_cast<Index>(idx.size());
    out.y.resize(m);
    out.x.resize(m, p());
    if (coords) out.coords = Matrix(m, 2);
    out.ids.reserve(idx.size());
    for (Index r = 0; r < m; ++r) {
      const Index i = idx[static_cast<std::size_t>(r)];
      out.y(r) = y(i);
      out.x.row(r) = x.row(i);
      if (coords) out.coords->row(r) = coords->row(i);
      out.ids.push_back(ids[static_cast<std::size_t>(i)]);
    }
    out.column_names = column_names;
    out.dependent_name = dependent_name;
    out.transforms = transforms;
    return out;
  }
};

//! Which CSV columns make up a Dataset. Empty `explanatory` selects every column not
//! otherwise claimed (dependent, id, coordinates).
struct ColumnSpec {
  std::string dependent;
  std::vector<std::string> explanatory;
  std::optional<std::string> id;
  std::optional<std::string> coord_x;
  std::optional<std::string> coord_y;
  bool lenient = false;  //!< drop rows with missing/non-numeric cells instead of failing
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::size_t> dropped_lines;  //!< 1-based source lines
};

inline Dataset load_csv(const std::string& path, const ColumnSpec& spec, LoadReport* report = nullptr) {
  const csv::Table t = csv::read(path, "dataset");
  auto col = [&](const std::string& name) {
    const auto c = t.column(name);
    if (!c) throw Error("dataset", "missing column '" + name + "' in '" + path + "'");
    return *c;
  };
  require(!spec.dependent.empty(), "dataset", "no dependent column given");
  const std::size_t dep = col(spec.dependent);
  const std::optional<std::size_t> idc = spec.id ? std::optional(col(*spec.id)) : std::nullopt;
  require(spec.coord_x.has_value() == spec.coord_y.has_value(), "dataset",
          "coordinates need both an x and a y column");
  const std::optional<std::size_t> cx = spec.coord_x ? std::optional(col(*spec.coord_x)) : std::nullopt;
  const std::optional<std::size_t> cy = spec.coord_y ? std::optional(col(*spec.coord_y)) : std::nullopt;

  std::vector<std::string> names = spec.explanatory;
  if (names.empty()) {
    std::set<std::size_t> claimed{dep};
    if (idc) claimed.insert(*idc);
    if (cx) claimed.insert(*cx);
    if (cy) claimed.insert(*cy);
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (!claimed.count(i)) names.push_back(t.header[i]);
    }
  }
  require(!names.empty(), "dataset", "no explanatory columns selected");
  std::vector<std::size_t> xc;
  for (const auto& nm : names) xc.push_back(col(nm));

  std::vector<std::size_t> numeric{dep};
  numeric.insert(numeric.end(), xc.begin(), xc.end());
  if (cx) numeric.push_back(*cx);
  if (cy) numeric.push_back(*cy);

  LoadReport rep;
  std::vector<std::vector<double>> vals;
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ++rep.rows_read;
    std::vector<double> v;
    v.reserve(numeric.size());
    bool ok = true;
    std::string bad;
    for (std::size_t c : numeric) {
      const std::optional<double> d = c < row.size() ? csv::parse_double(row[c]) : std::nullopt;
      if (!d || !std::isfinite(*d)) {
        ok = false;
        bad = t.header[c];
        break;
      }
      v.push_back(*d);
    }
    if (!ok) {
      if (!spec.lenient) {
        throw Error("dataset", "missing or non-numeric value in column '" + bad + "' at line " +
                                   std::to_string(t.line_numbers[r]));
      }
      ++rep.rows_dropped;
      rep.dropped_lines.push_back(t.line_numbers[r]);
      continue;
    }
    vals.push_back(std::move(v));
    if (idc) {
      require(*idc < row.size() && !row[*idc].empty(), "dataset",
              "empty id at line " + std::to_string(t.line_numbers[r]));
      ids.push_back(row[*idc]);
    } else {
      ids.push_back(std::to_string(rep.rows_read));
    }
  }
  if (report) *report = rep;
  if (vals.size() < 2) throw Error("dataset", "fewer than 2 usable rows");

  Dataset d;
  const Index n = static_cast<Index>(vals.size());
  const Index p = static_cast<Index>(xc.size());
  d.y.resize(n);
  d.x.resize(n, p);
  if (cx) d.coords = Matrix(n, 2);
  for (Index i = 0; i < n; ++i) {
    const auto& v = vals[static_cast<std::size_t>(i)];
    d.y(i) = v[0];
    for (Index j = 0; j < p; ++j) d.x(i, j) = v[static_cast<std::size_t>(1 + j)];
    if (cx) {
      (*d.coords)(i, 0) = v[static_cast<std::size_t>(1 + p)];
      (*d.coords)(i, 1) = v[static_cast<std::size_t>(2 + p)];
    }
  }
  d.ids = std::move(ids);
  d.column_names = names;
  d.dependent_name = spec.dependent;
  d.validate();
  return d;
}

//! Writes id, dependent, explanatory (and coordinate) columns; values round-trip exactly.
inline void write_csv(const Dataset& d, const std::string& path) {
  csv::Writer w(path, "dataset");
  std::vector<std::string> hdr{"id", d.dependent_name};
  hdr.insert(hdr.end(), d.column_names.begin(), d.column_names.end());
  if (d.coords) {
    hdr.emplace_back("coord_x");
    hdr.emplace_back("coord_y");
  }
  w.header(hdr);
  for (Index i = 0; i < d.n(); ++i) {
    w.field(d.ids[static_cast<std::size_t>(i)]).field(d.y(i));
    for (Index j = 0; j < d.p(); ++j) w.field(d.x(i, j));
    if (d.coords) w.field((*d.coords)(i, 0)).field((*d.coords)(i, 1));
    w.end_row();
  }
}

//! Column selector for transforms: the dependent vector or explanatory column `index`.
struct Column {
  static Column dependent() { return Column{true, 0}; }
  static Column explanatory(Index j) { return Column{false, j}; }
  bool is_dependent;
  Index index;
};

inline Dataset log_transform(Dataset d, Column c) {
  auto apply = [&](auto&& col, const std::string& name) {
    for (Index i = 0; i < col.size(); ++i) {
      if (!(col(i) > 0.0)) {
        throw Error("dataset", "log transform of '" + name + "' needs positive values; row '" +
                                   d.ids[static_cast<std::size_t>(i)] + "' has " + csv::format_double(col(i)));
      }
    }
    col = col.array().log().matrix();
    d.transforms.push_back("log(" + name + ")");
  };
  if (c.is_dependent) {
    apply(d.y, d.dependent_name);
  } else {
    require(c.index >= 0 && c.index < d.p(), "dataset", "column index out of range");
    auto col = d.x.col(c.index);
    apply(col, d.column_names[static_cast<std::size_t>(c.index)]);
  }
  return d;
}

//! Optional standardization (mean 0, unit sample sd). Constant columns are left unchanged.
inline Dataset zscore_transform(Dataset d, Column c) {
  auto apply = [&](auto&& col, const std::string& name) {
    const double n = static_cast<double>(col.size());
    const double mean = col.sum() / n;
    const double sd = std::sqrt((col.array() - mean).square().sum() / std::max(1.0, n - 1.0));
    if (sd > 0.0) col = ((col.array() - mean) / sd).matrix();
    d.transforms.push_back("zscore(" + name + ")");
  };
  if (c.is_dependent) {
    apply(d.y, d.dependent_name);
  } else {
    require(c.index >= 0 && c.index < d.p(), "dataset", "column index out of range");
    auto col = d.x.col(c.index);
    apply(col, d.column_names[static_cast<std::size_t>(c.index)]);
  }
  return d;
}

struct SplitDataset {
  Dataset train;
  Dataset test;
  std::vector<Index> train_indices;  //!< into the parent, ascending
  std::vector<Index> test_indices;   //!< into the parent, grouped by cluster label then ascending
};

//! Holds out exactly `per_cluster` rows of every cluster, drawn uniformly without replacement
//! from a generator seeded with `seed`.
inline SplitDataset split_by_cluster(const Dataset& d, std::span<const int> labels, int per_cluster,
                                     std::uint64_t seed) {
  require(static_cast<Index>(labels.size()) == d.n(), "dataset", "label count differs from row count");
  require(per_cluster >= 1, "dataset", "per_cluster must be >= 1");
  std::map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<Index>(i));
  for (const auto& [label, rows] : members) {
    if (static_cast<int>(rows.size()) < per_cluster + 2) {
      throw Error("dataset", "cluster " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                                 " members; at least " + std::to_string(per_cluster + 2) + " are needed");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> is_test(static_cast<std::size_t>(d.n()), false);
  SplitDataset out;
  for (auto& [label, rows] : members) {
    // Partial Fisher-Yates: the first per_cluster slots become the sample.
    for (int k = 0; k < per_cluster; ++k) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), rows.size() - 1);
      std::swap(rows[static_cast<std::size_t>(k)], rows[pick(rng)]);
    }
    std::vector<Index> chosen(rows.begin(), rows.begin() + per_cluster);
    std::sort(chosen.begin(), chosen.end());
    for (Index i : chosen) {
      is_test[static_cast<std::size_t>(i)] = true;
      out.test_indices.push_back(i);
    }
  }
  for (Index i = 0; i < d.n(); ++i) {
    if (!is_test[static_cast<std::size_t>(i)]) out.train_indices.push_back(i);
  }
  out.train = d.subset(out.train_indices);
  out.test = d.subset(out.test_indices);
  return out;
}

}  // namespace sarw

#endif  // SARW_DATASET_HPP_
