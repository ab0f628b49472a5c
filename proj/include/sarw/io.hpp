#ifndef SARW_IO_HPP_
#define SARW_IO_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sarw/admm.hpp"
#include "sarw/clustering.hpp"
#include "sarw/common.hpp"
#include "sarw/csv.hpp"
#include "sarw/dataset.hpp"
#include "sarw/spillover.hpp"
#include "sarw/submarkets.hpp"

namespace sarw::io {

using json = nlohmann::ordered_json;

inline constexpr double kTripletThreshold = 1e-8;

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create directory '" + dir + "': " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("io", "'" + path + "' is not valid JSON: " + e.what());
  }
}

//! W as (row_id, col_id, weight) triplets, entries with |w| > threshold only.
inline void write_w_triplets(const std::string& path, const Matrix& w, const std::vector<std::string>& ids,
                             double threshold = kTripletThreshold) {
  require(static_cast<Index>(ids.size()) == w.rows(), "io", "id count differs from W size");
  csv::Writer out(path);
  out.header({"row_id", "col_id", "weight"});
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      if (std::abs(w(i, j)) > threshold) {
        out.field(ids[static_cast<std::size_t>(i)]).field(ids[static_cast<std::size_t>(j)]).field(w(i, j)).end_row();
      }
    }
  }
}

inline Matrix read_w_triplets(const std::string& path, const std::vector<std::string>& ids) {
  const csv::Table t = csv::read(path, "io");
  const auto r = t.column("row_id");
  const auto c = t.column("col_id");
  const auto v = t.column("weight");
  require(r && c && v, "io", "'" + path + "' needs columns row_id, col_id, weight");
  std::unordered_map<std::string, Index> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], static_cast<Index>(i));
  const auto n = static_cast<Index>(ids.size());
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    const std::string where = " at line " + std::to_string(t.line_numbers[k]) + " of '" + path + "'";
    require(row.size() > std::max({*r, *c, *v}), "io", "short row" + where);
    const auto a = pos.find(row[*r]);
    const auto b = pos.find(row[*c]);
    require(a != pos.end(), "io", "unknown id '" + row[*r] + "'" + where);
    require(b != pos.end(), "io", "unknown id '" + row[*c] + "'" + where);
    const auto x = csv::parse_double(row[*v]);
    require(x.has_value(), "io", "non-numeric weight" + where);
    w(a->second, b->second) = *x;
  }
  return w;
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json named_coefficients(const std::vector<std::string>& names, const Vector& beta) {
  json o = json::object();
  for (Index j = 0; j < beta.size(); ++j) o[names[static_cast<std::size_t>(j)]] = beta(j);
  return o;
}

inline json fit_json(const admm::SarFit& fit, const std::vector<std::string>& names) {
  json o;
  o["beta"] = named_coefficients(names, fit.beta);
  o["lambda1"] = fit.lambda1;
  o["r_squared"] = fit.r_squared;
  o["objective"] = fit.objective;
  o["iterations"] = fit.iterations;
  o["converged"] = fit.converged;
  o["primal_residual"] = fit.primal_residual;
  o["eps_primal"] = fit.eps_primal;
  o["nonzeros"] = admm::count_nonzeros(fit.w);
  o["warnings"] = fit.warnings;
  return o;
}

inline std::vector<std::pair<std::string, std::string>> read_edges(const std::string& path) {
  const csv::Table t = csv::read(path, "io");
  require(t.header.size() >= 2, "io", "edge list '" + path + "' needs two id columns");
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    require(t.rows[k].size() >= 2, "io", "short row at line " + std::to_string(t.line_numbers[k]) + " of '" + path + "'");
    edges.emplace_back(t.rows[k][0], t.rows[k][1]);
  }
  return edges;
}

//! Scenario CSV (id, column_name, new_value) resolved against a dataset.
inline std::vector<spillover::Edit> read_scenario(const std::string& path, const Dataset& d) {
  const csv::Table t = csv::read(path, "io");
  const auto ic = t.column("id");
  const auto cc = t.column("column_name");
  const auto vc = t.column("new_value");
  require(ic && cc && vc, "io", "scenario '" + path + "' needs columns id, column_name, new_value");
  std::vector<spillover::Edit> edits;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    const std::string where = " at line " + std::to_string(t.line_numbers[k]) + " of '" + path + "'";
    require(row.size() > std::max({*ic, *cc, *vc}), "io", "short row" + where);
    const auto i = d.index_of(row[*ic]);
    const auto j = d.column_index(row[*cc]);
    const auto v = csv::parse_double(row[*vc]);
    require(i.has_value(), "io", "unknown id '" + row[*ic] + "'" + where);
    require(j.has_value(), "io", "unknown column '" + row[*cc] + "'" + where);
    require(v.has_value(), "io", "non-numeric new_value" + where);
    edits.push_back({*i, *j, *v});
  }
  return edits;
}

//! id, label, dependent value, embedding coordinates e1..ek and, when present, map coordinates.
inline void write_clusters(const std::string& path, const Dataset& d, const clustering::ClusterAssignment& a,
                           const clustering::SpectralEmbedding& emb) {
  csv::Writer out(path);
  std::vector<std::string> hdr{"id", "label", d.dependent_name};
  for (int c = 0; c < emb.coords.cols(); ++c) hdr.push_back("e" + std::to_string(c + 1));
  if (d.coords) {
    hdr.emplace_back("coord_x");
    hdr.emplace_back("coord_y");
  }
  out.header(hdr);
  for (Index i = 0; i < d.n(); ++i) {
    out.field(d.ids[static_cast<std::size_t>(i)]).field(a.labels[static_cast<std::size_t>(i)]).field(d.y(i));
    for (Index c = 0; c < emb.coords.cols(); ++c) out.field(emb.coords(i, c));
    if (d.coords) out.field((*d.coords)(i, 0)).field((*d.coords)(i, 1));
    out.end_row();
  }
}

//! Labels from a clusters CSV (id, label), in dataset order.
inline std::vector<int> read_cluster_labels(const std::string& path, const Dataset& d) {
  const csv::Table t = csv::read(path, "io");
  const auto ic = t.column("id");
  const auto lc = t.column("label");
  require(ic && lc, "io", "clusters file '" + path + "' needs columns id, label");
  std::vector<int> labels(static_cast<std::size_t>(d.n()), -1);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    require(row.size() > std::max(*ic, *lc), "io", "short row at line " + std::to_string(t.line_numbers[k]));
    const auto i = d.index_of(row[*ic]);
    const auto v = csv::parse_double(row[*lc]);
    require(i.has_value(), "io", "unknown id '" + row[*ic] + "' in '" + path + "'");
    require(v.has_value(), "io", "non-numeric label at line " + std::to_string(t.line_numbers[k]));
    labels[static_cast<std::size_t>(*i)] = static_cast<int>(*v);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0, "io", "no label for id '" + d.ids[i] + "' in '" + path + "'");
  }
  return labels;
}

// Plot data: flat CSVs, one per figure-style view.

inline void write_predictions(const std::string& path, const Dataset& d, const Vector& fitted) {
  csv::Writer out(path);
  out.header({"id", "actual", "predicted", "residual"});
  for (Index i = 0; i < d.n(); ++i) {
    out.field(d.ids[static_cast<std::size_t>(i)]).field(d.y(i)).field(fitted(i)).field(d.y(i) - fitted(i)).end_row();
  }
}

inline void write_eigenvalues(const std::string& path, const Vector& values) {
  csv::Writer out(path);
  out.header({"index", "eigenvalue"});
  for (Index i = 0; i < values.size(); ++i) out.field(i + 1).field(values(i)).end_row();
}

//! Top-two eigenvector scatter coloured by the dependent variable.
inline void write_eigvec_scatter(const std::string& path, const Dataset& d, const Matrix& vectors) {
  csv::Writer out(path);
  out.header({"id", "v1", "v2", d.dependent_name});
  for (Index i = 0; i < d.n(); ++i) {
    out.field(d.ids[static_cast<std::size_t>(i)]).field(vectors(i, 0));
    out.field(vectors.cols() > 1 ? vectors(i, 1) : 0.0).field(d.y(i)).end_row();
  }
}

inline void write_spillover(const std::string& path, const std::vector<std::string>& ids,
                            const spillover::SpilloverResult& r, const std::vector<int>* labels = nullptr) {
  csv::Writer out(path);
  std::vector<std::string> hdr{"id", "y_base", "y_new", "delta"};
  if (labels) hdr.emplace_back("label");
  out.header(hdr);
  for (Index i = 0; i < r.delta.size(); ++i) {
    out.field(ids[static_cast<std::size_t>(i)]).field(r.y_base(i)).field(r.y_new(i)).field(r.delta(i));
    if (labels) out.field((*labels)[static_cast<std::size_t>(i)]);
    out.end_row();
  }
}

inline void write_submarket_rows(const std::string& path, const submarkets::SubmarketReport& rep) {
  csv::Writer out(path);
  out.header({"id", "cluster", "actual", "global_pred", "local_pred"});
  for (const auto& r : rep.test_rows) {
    out.field(r.id).field(r.cluster).field(r.actual).field(r.global_pred).field(r.local_pred).end_row();
  }
}

inline json submarket_json(const submarkets::SubmarketReport& rep, const std::vector<std::string>& names) {
  json o;
  o["n_train"] = rep.n_train;
  o["n_test"] = rep.n_test;
  o["rmse_global"] = rep.rmse_global;
  o["rmse_local"] = rep.rmse_local;
  o["transforms"] = rep.transforms;
  o["global_beta"] = named_coefficients(names, rep.global_fit.beta);
  o["global_r_squared"] = rep.global_fit.r_squared;
  json cl = json::array();
  for (const auto& c : rep.clusters) {
    json e;
    e["label"] = c.label;
    e["n_train"] = c.n_train;
    e["n_test"] = c.n_test;
    e["rmse_global"] = c.rmse_global;
    e["rmse_local"] = c.rmse_local;
    e["used_global_fallback"] = c.used_global_fallback;
    e["beta"] = named_coefficients(names, c.local_fit.beta);
    cl.push_back(std::move(e));
  }
  o["clusters"] = std::move(cl);
  o["warnings"] = rep.warnings;
  return o;
}

}  // namespace sarw::io

#endif  // SARW_IO_HPP_
