#ifndef SARW_SUBMARKETS_HPP_
#define SARW_SUBMARKETS_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sarw/common.hpp"
#include "sarw/dataset.hpp"
#include "sarw/ols.hpp"

namespace sarw::submarkets {

struct TestRow {
  std::string id;
  Index parent_index = 0;
  int cluster = 0;
  double actual = 0.0;
  double global_pred = 0.0;
  double local_pred = 0.0;
};

struct ClusterSummary {
  int label = 0;
  Index n_train = 0;
  Index n_test = 0;
  OlsFit local_fit;
  bool used_global_fallback = false;  //!< too few training rows for a local fit
  double rmse_global = 0.0;
  double rmse_local = 0.0;
};

struct SubmarketReport {
  OlsFit global_fit;
  std::vector<ClusterSummary> clusters;  //!< ordered by label
  std::vector<TestRow> test_rows;
  double rmse_global = 0.0;
  double rmse_local = 0.0;
  Index n_train = 0;
  Index n_test = 0;
  std::vector<std::string> transforms;  //!< as declared on the dataset
  Warnings warnings;
};

namespace detail {

inline double rmse_of(const std::vector<TestRow>& rows, bool local) {
  if (rows.empty()) return 0.0;
  double acc = 0.0;
  for (const TestRow& r : rows) {
    const double e = r.actual - (local ? r.local_pred : r.global_pred);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(rows.size()));
}

}  // namespace detail

//! Holds out per_cluster rows of each cluster, fits OLS on the pooled training rows and on each
//! cluster's training rows, and scores both on the held-out rows. A cluster with no more
//! training rows than columns uses the global fit for its test rows and is flagged.
inline SubmarketReport evaluate_submarkets(const Dataset& d, std::span<const int> labels, int per_cluster,
                                           std::uint64_t seed) {
  const SplitDataset split = split_by_cluster(d, labels, per_cluster, seed);
  SubmarketReport rep;
  rep.transforms = d.transforms;
  rep.n_train = split.train.n();
  rep.n_test = split.test.n();
  rep.global_fit = fit_ols(split.train.x, split.train.y);
  for (const auto& w : rep.global_fit.warnings) rep.warnings.push_back("global fit: " + w);

  std::map<int, std::vector<Index>> train_rows;  // positions within split.train
  for (std::size_t r = 0; r < split.train_indices.size(); ++r) {
    train_rows[labels[static_cast<std::size_t>(split.train_indices[r])]].push_back(static_cast<Index>(r));
  }
  std::map<int, std::size_t> slot;
  for (const auto& [label, rows] : train_rows) {
    ClusterSummary cs;
    cs.label = label;
    cs.n_train = static_cast<Index>(rows.size());
    const Dataset local = split.train.subset(rows);
    if (cs.n_train <= d.p()) {
      cs.used_global_fallback = true;
      cs.local_fit = rep.global_fit;
      rep.warnings.push_back("cluster " + std::to_string(label) + ": " + std::to_string(cs.n_train) +
                             " training rows <= p; using the global fit");
    } else {
      cs.local_fit = fit_ols(local.x, local.y);
      for (const auto& w : cs.local_fit.warnings) rep.warnings.push_back("cluster " + std::to_string(label) + ": " + w);
    }
    slot[label] = rep.clusters.size();
    rep.clusters.push_back(std::move(cs));
  }

  for (std::size_t r = 0; r < split.test_indices.size(); ++r) {
    const Index parent = split.test_indices[r];
    const int label = labels[static_cast<std::size_t>(parent)];
    const Index i = static_cast<Index>(r);
    TestRow row;
    row.id = split.test.ids[r];
    row.parent_index = parent;
    row.cluster = label;
    row.actual = split.test.y(i);
    row.global_pred = split.test.x.row(i).dot(rep.global_fit.beta);
    row.local_pred = split.test.x.row(i).dot(rep.clusters[slot.at(label)].local_fit.beta);
    rep.test_rows.push_back(std::move(row));
  }

  for (ClusterSummary& cs : rep.clusters) {
    std::vector<TestRow> mine;
    for (const TestRow& r : rep.test_rows) {
      if (r.cluster == cs.label) mine.push_back(r);
    }
    cs.n_test = static_cast<Index>(mine.size());
    cs.rmse_global = detail::rmse_of(mine, false);
    cs.rmse_local = detail::rmse_of(mine, true);
  }
  rep.rmse_global = detail::rmse_of(rep.test_rows, false);
  rep.rmse_local = detail::rmse_of(rep.test_rows, true);
  return rep;
}

}  // namespace sarw::submarkets

#endif  // SARW_SUBMARKETS_HPP_
