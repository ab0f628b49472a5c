#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sarw/admm.hpp"
#include "sarw/bench.hpp"
#include "sarw/clustering.hpp"
#include "sarw/dataset.hpp"
#include "sarw/io.hpp"
#include "sarw/ols.hpp"
#include "sarw/sar_fixed.hpp"
#include "sarw/spillover.hpp"
#include "sarw/submarkets.hpp"
#include "sarw/synth.hpp"

namespace sarw::cli {
namespace {

using io::json;

struct DataOptions {
  std::string path;
  std::string dependent;
  std::vector<std::string> explanatory;
  std::string id;
  std::string coord_x;
  std::string coord_y;
  bool lenient = false;
  bool log_dependent = false;
  std::vector<std::string> log_columns;
  std::vector<std::string> zscore_columns;
  bool intercept = false;
};

struct AdmmOptions {
  double lambda1 = 0.0;
  double rho1 = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  int max_iter = 20000;
  bool adaptive_rho = false;
  bool literal = false;
};

struct Options {
  std::string out = "out";
  std::uint64_t seed = 42;
  DataOptions data;
  AdmmOptions admm;

  // fit-sar
  int knn = 0;
  std::string edges;
  // sweep
  std::vector<double> lambdas;
  int grid = 0;
  double grid_max = 1.0;
  bool warm_start = false;
  unsigned threads = 1;
  std::string w_true;
  // cluster, submarkets, spillover
  std::string w_path;
  std::string beta_path;
  int k = 0;
  int restarts = clustering::kDefaultRestarts;
  std::string clusters_path;
  int per_cluster = 30;
  std::string scenario;
  // synth, bench
  Index n = 50;
  Index p = 3;
  double density = 0.05;
  double spectral_scale = 0.5;
  double noise_sigma = 0.01;
  int blocks = 0;
  bool synthetic = false;
  bool scaling = false;
  int scaling_iters = 100;
};

void add_out_options(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output directory (created if missing)")->capture_default_str();
  sub->add_option("--seed", o.seed, "Seed for every random draw in the run")->capture_default_str();
}

void add_data_options(CLI::App* sub, DataOptions& d, bool required = true) {
  auto* data = sub->add_option("--data", d.path, "Input CSV (comma-delimited, header row)");
  auto* dep = sub->add_option("--dependent", d.dependent, "Dependent column");
  if (required) {
    data->required();
    dep->required();
  }
  sub->add_option("--explanatory", d.explanatory, "Explanatory columns (default: all unclaimed columns)")
      ->delimiter(',');
  sub->add_option("--id", d.id, "Identifier column (default: row numbers)");
  sub->add_option("--coord-x", d.coord_x, "X / longitude column");
  sub->add_option("--coord-y", d.coord_y, "Y / latitude column");
  sub->add_flag("--lenient", d.lenient, "Drop rows with missing or non-numeric cells");
  sub->add_flag("--log-dependent", d.log_dependent, "Replace the dependent variable by its natural log");
  sub->add_option("--log-columns", d.log_columns, "Explanatory columns to log-transform")->delimiter(',');
  sub->add_option("--zscore-columns", d.zscore_columns, "Explanatory columns to standardize")->delimiter(',');
  sub->add_flag("--intercept", d.intercept, "Append a column of ones named 'const'");
}

void add_admm_options(CLI::App* sub, AdmmOptions& a) {
  sub->add_option("--lambda1", a.lambda1, "L1 weight on W")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--rho1", a.rho1, "Augmented-Lagrangian penalty")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--eps-abs", a.eps_abs, "Absolute stopping tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--eps-rel", a.eps_rel, "Relative stopping tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", a.max_iter, "Iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_flag("--adaptive-rho", a.adaptive_rho, "Residual-balancing penalty adaptation");
  sub->add_flag("--paper-literal", a.literal, "Use the uncorrected closed-form updates (diverges in practice)");
}

admm::AdmmConfig admm_config(const Options& o) {
  admm::AdmmConfig c;
  c.lambda1 = o.admm.lambda1;
  c.rho1 = o.admm.rho1;
  c.eps_abs = o.admm.eps_abs;
  c.eps_rel = o.admm.eps_rel;
  c.max_iter = o.admm.max_iter;
  c.adaptive_rho = o.admm.adaptive_rho;
  c.rule = o.admm.literal ? admm::UpdateRule::kLiteral : admm::UpdateRule::kCorrected;
  c.seed = o.seed;
  return c;
}

std::optional<std::string> opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

Dataset load(const DataOptions& o, LoadReport* rep, Warnings& warnings) {
  ColumnSpec spec;
  spec.dependent = o.dependent;
  spec.explanatory = o.explanatory;
  spec.id = opt(o.id);
  spec.coord_x = opt(o.coord_x);
  spec.coord_y = opt(o.coord_y);
  spec.lenient = o.lenient;
  Dataset d = load_csv(o.path, spec, rep);
  if (rep && rep->rows_dropped > 0) {
    warnings.push_back("dropped " + std::to_string(rep->rows_dropped) + " rows with missing values");
  }
  if (o.log_dependent) d = log_transform(std::move(d), Column::dependent());
  auto column = [&](const std::string& name) {
    const auto j = d.column_index(name);
    if (!j) throw Error("dataset", "unknown explanatory column '" + name + "'");
    return Column::explanatory(*j);
  };
  for (const auto& c : o.log_columns) d = log_transform(std::move(d), column(c));
  for (const auto& c : o.zscore_columns) d = zscore_transform(std::move(d), column(c));
  if (o.intercept) {
    d.x.conservativeResize(Eigen::NoChange, d.p() + 1);
    d.x.col(d.p() - 1).setOnes();
    d.column_names.emplace_back("const");
  }
  d.validate();
  return d;
}

json dataset_json(const Dataset& d, const LoadReport& rep) {
  json o;
  o["n"] = d.n();
  o["p"] = d.p();
  o["dependent"] = d.dependent_name;
  o["columns"] = d.column_names;
  o["transforms"] = d.transforms;
  o["rows_read"] = rep.rows_read;
  o["rows_dropped"] = rep.rows_dropped;
  return o;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Context {
  const Options& o;
  std::ostream& out;
  std::string dir;
  std::string plot_dir;

  std::string file(const std::string& name) const { return io::join(dir, name); }
  std::string plot(const std::string& name) const { return io::join(plot_dir, name); }
};

// Either reads W (and beta) from files or fits ADMM on the dataset.
struct LearntW {
  Matrix w;
  std::optional<Vector> beta;
  std::optional<admm::SarFit> fit;
};

LearntW obtain_w(const Context& c, const Dataset& d, bool need_beta) {
  LearntW r;
  if (!c.o.w_path.empty()) {
    r.w = io::read_w_triplets(c.o.w_path, d.ids);
    if (need_beta) {
      if (c.o.beta_path.empty()) throw Error("cli", "--w needs --beta for this subcommand");
      const json b = io::read_json(c.o.beta_path);
      if (!b.contains("beta") || !b["beta"].is_object()) throw Error("io", "'" + c.o.beta_path + "' has no beta object");
      Vector beta(d.p());
      for (Index j = 0; j < d.p(); ++j) {
        const std::string& name = d.column_names[static_cast<std::size_t>(j)];
        if (!b["beta"].contains(name)) throw Error("io", "beta file has no coefficient for '" + name + "'");
        beta(j) = b["beta"][name].get<double>();
      }
      r.beta = beta;
    }
    return r;
  }
  r.fit = admm::fit_admm(d.y, d.x, admm_config(c.o));
  r.w = r.fit->w;
  r.beta = r.fit->beta;
  io::write_w_triplets(c.file("w.csv"), r.w, d.ids);
  json b;
  b["model"] = "admm";
  b.update(io::fit_json(*r.fit, d.column_names));
  io::write_json(c.file("beta.json"), b);
  return r;
}

int cmd_fit_ols(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  const OlsFit fit = fit_ols(d.x, d.y);
  warn.insert(warn.end(), fit.warnings.begin(), fit.warnings.end());
  json b;
  b["model"] = "ols";
  b["beta"] = io::named_coefficients(d.column_names, fit.beta);
  b["r_squared"] = fit.r_squared;
  io::write_json(c.file("beta.json"), b);
  json r;
  r["subcommand"] = "fit-ols";
  r["dataset"] = dataset_json(d, rep);
  r["r_squared"] = fit.r_squared;
  r["rmse"] = rmse(d.y, fit.fitted);
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  io::write_predictions(c.plot("predictions.csv"), d, fit.fitted);
  c.out << "fit-ols: n=" << d.n() << " p=" << d.p() << " R2=" << fmt(fit.r_squared) << "\n";
  return 0;
}

int cmd_fit_sar(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  FixedW fw;
  if (c.o.knn > 0) {
    if (!d.coords) throw Error("sar_fixed", "--knn needs --coord-x and --coord-y");
    fw = build_knn_weights(*d.coords, c.o.knn);
  } else if (!c.o.edges.empty()) {
    fw = build_adjacency_weights(d.ids, io::read_edges(c.o.edges));
  } else {
    throw Error("cli", "fit-sar needs --knn or --edges");
  }
  const SarMlFit fit = fit_sar_ml(d.y, d.x, fw);
  warn.insert(warn.end(), fw.warnings.begin(), fw.warnings.end());
  warn.insert(warn.end(), fit.warnings.begin(), fit.warnings.end());
  const double r2 = r_squared(d.y, fit.fitted);
  io::write_w_triplets(c.file("w.csv"), fw.w, d.ids);
  json b;
  b["model"] = "sar";
  b["rho"] = fit.rho;
  b["beta"] = io::named_coefficients(d.column_names, fit.beta);
  b["r_squared"] = r2;
  io::write_json(c.file("beta.json"), b);
  json r;
  r["subcommand"] = "fit-sar";
  r["dataset"] = dataset_json(d, rep);
  r["weights"] = c.o.knn > 0 ? "knn(" + std::to_string(c.o.knn) + ")" : "adjacency";
  r["rho"] = fit.rho;
  r["objective"] = fit.objective;
  r["r_squared"] = r2;
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  io::write_predictions(c.plot("predictions.csv"), d, fit.fitted);
  csv::Writer prof(c.plot("sar_profile.csv"));
  prof.header({"rho", "objective"});
  for (const auto& [rho, v] : fit.profile) prof.field(rho).field(v).end_row();
  c.out << "fit-sar: n=" << d.n() << " rho=" << fmt(fit.rho) << " R2=" << fmt(r2) << "\n";
  return 0;
}

int cmd_fit_admm(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  const admm::SarFit fit = admm::fit_admm(d.y, d.x, admm_config(c.o));
  const OlsFit ols = fit_ols(d.x, d.y);
  io::write_w_triplets(c.file("w.csv"), fit.w, d.ids);
  json b;
  b["model"] = "admm";
  b.update(io::fit_json(fit, d.column_names));
  io::write_json(c.file("beta.json"), b);
  json r;
  r["subcommand"] = "fit-admm";
  r["dataset"] = dataset_json(d, rep);
  r["fit"] = io::fit_json(fit, d.column_names);
  r["ols_r_squared"] = ols.r_squared;
  r["lambda_max"] = admm::lambda_max(d.y, d.x);
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  io::write_predictions(c.plot("predictions.csv"), d, fit.fitted);
  csv::Writer hist(c.plot("residual_history.csv"));
  hist.header({"iteration", "primal", "dual", "eps_primal", "eps_dual"});
  for (std::size_t i = 0; i < fit.residual_history.size(); ++i) {
    const auto& h = fit.residual_history[i];
    hist.field(i + 1).field(h.primal).field(h.dual).field(h.eps_primal).field(h.eps_dual).end_row();
  }
  c.out << "fit-admm: n=" << d.n() << " lambda1=" << fmt(fit.lambda1) << " R2=" << fmt(fit.r_squared)
        << " (OLS " << fmt(ols.r_squared) << ") iterations=" << fit.iterations
        << (fit.converged ? " converged" : " NOT converged") << " nnz=" << admm::count_nonzeros(fit.w) << "\n";
  return 0;
}

int cmd_sweep(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  std::vector<double> lambdas = c.o.lambdas;
  const double lmax = admm::lambda_max(d.y, d.x);
  if (lambdas.empty()) {
    if (c.o.grid < 1) throw Error("cli", "sweep needs --lambdas or --grid");
    for (int i = 0; i < c.o.grid; ++i) {
      lambdas.push_back(c.o.grid == 1 ? 0.0 : c.o.grid_max * lmax * i / (c.o.grid - 1));
    }
  }
  std::optional<Matrix> w_true;
  if (!c.o.w_true.empty()) w_true = io::read_w_triplets(c.o.w_true, d.ids);
  const auto fits = admm::lambda_sweep(d.y, d.x, lambdas, admm_config(c.o), c.o.warm_start, c.o.threads);
  csv::Writer tab(c.plot("sweep.csv"));
  std::vector<std::string> hdr{"lambda1", "r_squared", "objective", "nonzeros", "iterations", "converged"};
  if (w_true) hdr.emplace_back("support_f1");
  tab.header(hdr);
  json r;
  r["subcommand"] = "sweep";
  r["dataset"] = dataset_json(d, rep);
  r["lambda_max"] = lmax;
  json arr = json::array();
  double best_f1 = -1.0;
  for (const auto& f : fits) {
    tab.field(f.lambda1).field(f.r_squared).field(f.objective).field(admm::count_nonzeros(f.w));
    tab.field(f.iterations).field(f.converged ? 1 : 0);
    json e = io::fit_json(f, d.column_names);
    if (w_true) {
      const double f1 = synth::support_f1(f.w, *w_true);
      best_f1 = std::max(best_f1, f1);
      tab.field(f1);
      e["support_f1"] = f1;
    }
    tab.end_row();
    arr.push_back(std::move(e));
  }
  r["fits"] = std::move(arr);
  if (w_true) r["best_support_f1"] = best_f1;
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  c.out << "sweep: " << fits.size() << " fits, lambda_max=" << fmt(lmax);
  if (w_true) c.out << " best F1=" << fmt(best_f1);
  c.out << "\n";
  return 0;
}

struct Clustered {
  clustering::ClusterAssignment assignment;
  clustering::SpectralEmbedding embedding;
};

Clustered cluster_and_write(const Context& c, const Dataset& d, const Matrix& w) {
  Clustered r;
  r.assignment = c.o.k > 0 ? clustering::cluster_w(w, c.o.k, c.o.seed, &r.embedding, c.o.restarts)
                            : clustering::cluster_w(w, std::nullopt, c.o.seed, &r.embedding, c.o.restarts);
  io::write_clusters(c.file("clusters.csv"), d, r.assignment, r.embedding);
  io::write_eigenvalues(c.plot("eigenvalues.csv"), r.embedding.eigenvalues);
  const numerics::EigenDecomposition eig = numerics::sym_eig(0.5 * (w + w.transpose()));
  io::write_eigvec_scatter(c.plot("eigvec_scatter.csv"), d, eig.vectors);
  if (d.coords) {
    csv::Writer map(c.plot("cluster_map.csv"));
    map.header({"id", "coord_x", "coord_y", "label"});
    for (Index i = 0; i < d.n(); ++i) {
      map.field(d.ids[static_cast<std::size_t>(i)]).field((*d.coords)(i, 0)).field((*d.coords)(i, 1));
      map.field(r.assignment.labels[static_cast<std::size_t>(i)]).end_row();
    }
  }
  return r;
}

json cluster_json(const Clustered& cl) {
  json o;
  o["k"] = cl.assignment.k;
  o["inertia"] = cl.assignment.inertia;
  o["seed"] = cl.assignment.seed;
  std::vector<int> sizes(static_cast<std::size_t>(cl.assignment.k), 0);
  for (int l : cl.assignment.labels) ++sizes[static_cast<std::size_t>(l)];
  o["sizes"] = sizes;
  const Index head = std::min<Index>(clustering::kDefaultKMax + 1, cl.embedding.eigenvalues.size());
  o["leading_eigenvalues"] = io::vector_json(cl.embedding.eigenvalues.head(head));
  o["warnings"] = cl.assignment.warnings;
  return o;
}

int cmd_cluster(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  const LearntW lw = obtain_w(c, d, false);
  const Clustered cl = cluster_and_write(c, d, lw.w);
  json r;
  r["subcommand"] = "cluster";
  r["dataset"] = dataset_json(d, rep);
  if (lw.fit) r["fit"] = io::fit_json(*lw.fit, d.column_names);
  r["clustering"] = cluster_json(cl);
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  c.out << "cluster: n=" << d.n() << " k=" << cl.assignment.k << " inertia=" << fmt(cl.assignment.inertia) << "\n";
  return 0;
}

int cmd_submarkets(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  std::vector<int> labels;
  json r;
  r["subcommand"] = "submarkets";
  r["dataset"] = dataset_json(d, rep);
  if (!c.o.clusters_path.empty()) {
    labels = io::read_cluster_labels(c.o.clusters_path, d);
  } else {
    const LearntW lw = obtain_w(c, d, false);
    const Clustered cl = cluster_and_write(c, d, lw.w);
    labels = cl.assignment.labels;
    r["clustering"] = cluster_json(cl);
  }
  const auto report = submarkets::evaluate_submarkets(d, labels, c.o.per_cluster, c.o.seed);
  r["submarkets"] = io::submarket_json(report, d.column_names);
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  io::write_submarket_rows(c.plot("submarket_test_rows.csv"), report);
  c.out << "submarkets: train=" << report.n_train << " test=" << report.n_test
        << " rmse_global=" << fmt(report.rmse_global) << " rmse_local=" << fmt(report.rmse_local);
  for (const auto& cs : report.clusters) {
    c.out << " [" << cs.label << ": " << fmt(cs.rmse_global) << " vs " << fmt(cs.rmse_local) << "]";
  }
  c.out << "\n";
  return 0;
}

int cmd_spillover(const Context& c) {
  LoadReport rep;
  Warnings warn;
  const Dataset d = load(c.o.data, &rep, warn);
  if (c.o.scenario.empty()) throw Error("cli", "spillover needs --scenario");
  const LearntW lw = obtain_w(c, d, true);
  const auto edits = io::read_scenario(c.o.scenario, d);
  const Matrix x_new = spillover::perturb(d.x, edits);
  const auto res = spillover::predict_spillover(lw.w, *lw.beta, d.x, x_new);
  std::optional<std::vector<int>> labels;
  if (!c.o.clusters_path.empty()) labels = io::read_cluster_labels(c.o.clusters_path, d);
  io::write_spillover(c.file("spillover.csv"), d.ids, res);
  io::write_spillover(c.plot("spillover.csv"), d.ids, res, labels ? &*labels : nullptr);
  Index top = 0;
  res.delta.cwiseAbs().maxCoeff(&top);
  json r;
  r["subcommand"] = "spillover";
  r["dataset"] = dataset_json(d, rep);
  if (lw.fit) r["fit"] = io::fit_json(*lw.fit, d.column_names);
  r["spectral_radius"] = res.spectral_radius;
  r["spectral_radius_is_bound"] = !res.radius_exact;
  r["edits"] = edits.size();
  std::vector<std::string> rows;
  for (Index i : res.perturbed_rows) rows.push_back(d.ids[static_cast<std::size_t>(i)]);
  r["perturbed_ids"] = rows;
  r["max_abs_delta_id"] = d.ids[static_cast<std::size_t>(top)];
  r["max_abs_delta"] = res.delta(top);
  r["warnings"] = warn;
  io::write_json(c.file("report.json"), r);
  c.out << "spillover: " << edits.size() << " edits, radius=" << fmt(res.spectral_radius)
        << " max |delta| at " << d.ids[static_cast<std::size_t>(top)] << " (" << fmt(res.delta(top)) << ")\n";
  return 0;
}

int cmd_synth(const Context& c) {
  synth::SynthSpec spec;
  spec.n = c.o.n;
  spec.p = c.o.p;
  spec.density = c.o.density;
  spec.spectral_scale = c.o.spectral_scale;
  spec.noise_sigma = c.o.noise_sigma;
  if (c.o.blocks > 0) spec.n_blocks = c.o.blocks;
  spec.seed = c.o.seed;
  const Matrix w = synth::generate_w(spec);
  const Vector beta = synth::generate_beta(spec.p, spec.seed);
  const Dataset d = synth::generate_dataset(w, beta, spec);
  write_csv(d, c.file("data.csv"));
  io::write_w_triplets(c.file("w_true.csv"), w, d.ids);
  json b;
  b["model"] = "truth";
  b["beta"] = io::named_coefficients(d.column_names, beta);
  io::write_json(c.file("beta_true.json"), b);
  json r;
  r["subcommand"] = "synth";
  r["n"] = spec.n;
  r["p"] = spec.p;
  r["nonzeros"] = admm::count_nonzeros(w);
  r["spectral_radius"] = numerics::spectral_radius(w);
  io::write_json(c.file("report.json"), r);
  c.out << "synth: n=" << spec.n << " p=" << spec.p << " nnz=" << admm::count_nonzeros(w) << "\n";
  return 0;
}

int cmd_bench(const Context& c) {
  json r;
  r["subcommand"] = "bench";
  Dataset d;
  if (c.o.synthetic) {
    d = bench::bench_instance(c.o.n, c.o.p, c.o.seed);
  } else {
    LoadReport rep;
    Warnings warn;
    if (c.o.data.path.empty()) throw Error("cli", "bench needs --synthetic or --data");
    d = load(c.o.data, &rep, warn);
  }
  const bench::ConvergenceRun run = bench::time_fit(d, admm_config(c.o));
  r["n"] = d.n();
  r["p"] = d.p();
  r["lambda1"] = c.o.admm.lambda1;
  r["seconds"] = run.seconds;
  r["iterations"] = run.fit.iterations;
  r["converged"] = run.fit.converged;
  r["seconds_per_iteration"] = run.seconds / run.fit.iterations;
  c.out << "bench: n=" << d.n() << " p=" << d.p() << " wall=" << fmt(run.seconds) << "s iterations="
        << run.fit.iterations << (run.fit.converged ? " converged" : " NOT converged");
  if (c.o.scaling) {
    const auto sc = bench::iteration_scaling({100, 200, 400, 800}, c.o.p, c.o.scaling_iters, 3, c.o.seed);
    csv::Writer tab(c.plot("bench_scaling.csv"));
    tab.header({"n", "seconds_per_iteration"});
    json pts = json::array();
    for (const auto& pt : sc.points) {
      tab.field(pt.n).field(pt.seconds_per_iter).end_row();
      pts.push_back({{"n", pt.n}, {"seconds_per_iteration", pt.seconds_per_iter}});
    }
    r["scaling"] = {{"points", pts}, {"loglog_slope", sc.slope}};
    c.out << " scaling slope=" << fmt(sc.slope);
  }
  c.out << "\n";
  io::write_json(c.file("report.json"), r);
  return 0;
}

// The selected subcommand's options as "<sub>.<key>=value" lines, readable by --config.
std::string resolved_config(const CLI::App* sub) {
  std::istringstream in(sub->config_to_str(true, false));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == '[') {
      out << line << '\n';
      continue;
    }
    out << sub->get_name() << '.' << line << '\n';
  }
  return out.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint inference of sparse spatial weights and regression coefficients"};
  app.name("sarw");
  app.set_config("--config", "", "Keyed config file (flags on the command line win)")->configurable(false);
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  using Handler = std::function<int(const Context&)>;
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto add = [&](const std::string& name, const std::string& help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    add_out_options(s, o);
    subs.emplace_back(s, std::move(h));
    return s;
  };

  auto* ols = add("fit-ols", "Ordinary least squares baseline", cmd_fit_ols);
  add_data_options(ols, o.data);

  auto* sar = add("fit-sar", "SAR with a fixed k-NN or adjacency W", cmd_fit_sar);
  add_data_options(sar, o.data);
  sar->add_option("--knn", o.knn, "Neighbours per location (needs coordinates)");
  sar->add_option("--edges", o.edges, "Adjacency edge list CSV (two id columns)");

  auto* fa = add("fit-admm", "Learn W and beta by ADMM", cmd_fit_admm);
  add_data_options(fa, o.data);
  add_admm_options(fa, o.admm);

  auto* sw = add("sweep", "ADMM fits over a list of lambda1 values", cmd_sweep);
  add_data_options(sw, o.data);
  add_admm_options(sw, o.admm);
  sw->add_option("--lambdas", o.lambdas, "Comma-separated lambda1 values")->delimiter(',');
  sw->add_option("--grid", o.grid, "Evenly spaced lambda1 values from 0 to grid-max * lambda_max");
  sw->add_option("--grid-max", o.grid_max, "Upper end of the grid as a fraction of lambda_max")->capture_default_str();
  sw->add_flag("--warm-start", o.warm_start, "Start each fit from the previous state");
  sw->add_option("--threads", o.threads, "Worker threads for independent fits")->capture_default_str();
  sw->add_option("--w-true", o.w_true, "Ground-truth W triplets for support F1");

  auto* cl = add("cluster", "Spectral clustering of a learnt W", cmd_cluster);
  add_data_options(cl, o.data);
  add_admm_options(cl, o.admm);
  cl->add_option("--w", o.w_path, "W triplets (default: fit ADMM first)");
  cl->add_option("--k", o.k, "Number of clusters (default: eigen-gap choice)");
  cl->add_option("--restarts", o.restarts, "k-means restarts")->capture_default_str();

  auto* sm = add("submarkets", "Global vs per-cluster OLS on held-out rows", cmd_submarkets);
  add_data_options(sm, o.data);
  add_admm_options(sm, o.admm);
  sm->add_option("--clusters", o.clusters_path, "Clusters CSV (id, label); default: cluster a learnt W");
  sm->add_option("--w", o.w_path, "W triplets used when --clusters is absent");
  sm->add_option("--k", o.k, "Number of clusters when clustering here");
  sm->add_option("--restarts", o.restarts, "k-means restarts")->capture_default_str();
  sm->add_option("--per-cluster", o.per_cluster, "Held-out rows per cluster")->capture_default_str();

  auto* sp = add("spillover", "What-if predictions through (I - W)^-1", cmd_spillover);
  add_data_options(sp, o.data);
  add_admm_options(sp, o.admm);
  sp->add_option("--w", o.w_path, "W triplets (default: fit ADMM first)");
  sp->add_option("--beta", o.beta_path, "beta.json matching --w");
  sp->add_option("--scenario", o.scenario, "Scenario CSV (id, column_name, new_value)");
  sp->add_option("--clusters", o.clusters_path, "Clusters CSV to tag deltas with labels");

  auto* sy = add("synth", "Generate a synthetic dataset with known W and beta", cmd_synth);
  sy->add_option("--n", o.n, "Locations")->capture_default_str();
  sy->add_option("--p", o.p, "Explanatory variables")->capture_default_str();
  sy->add_option("--density", o.density, "Fraction of nonzero off-diagonal entries")->capture_default_str();
  sy->add_option("--spectral-scale", o.spectral_scale, "Spectral radius of W")->capture_default_str();
  sy->add_option("--noise-sigma", o.noise_sigma, "Noise standard deviation")->capture_default_str();
  sy->add_option("--blocks", o.blocks, "Concentrate links in this many blocks (0: none)")->capture_default_str();

  auto* be = add("bench", "Time ADMM to convergence", cmd_bench);
  add_data_options(be, o.data, false);
  add_admm_options(be, o.admm);
  be->add_flag("--synthetic", o.synthetic, "Use a generated instance of size --n x --p");
  be->add_option("--n", o.n, "Locations for --synthetic")->capture_default_str();
  be->add_option("--p", o.p, "Explanatory variables for --synthetic")->capture_default_str();
  be->add_flag("--scaling", o.scaling, "Also measure time per iteration at n = 100, 200, 400, 800");
  be->add_option("--scaling-iters", o.scaling_iters, "Iterations per scaling probe")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  // Empty lists round-trip through config files as a single empty string.
  for (auto* v : {&o.data.explanatory, &o.data.log_columns, &o.data.zscore_columns}) {
    std::erase_if(*v, [](const std::string& s) { return s.empty(); });
  }

  for (auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    try {
      Context ctx{o, out, o.out, io::join(o.out, "plotdata")};
      io::ensure_dir(ctx.dir);
      io::ensure_dir(ctx.plot_dir);
      {
        std::ofstream cfg(ctx.file("config.resolved"));
        if (!cfg) throw Error("io", "cannot write config.resolved in '" + ctx.dir + "'");
        cfg << resolved_config(sub);
      }
      return handler(ctx);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  err << app.help();
  return 2;
}

}  // namespace sarw::cli
