#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "isingcut/baselines.hpp"
#include "isingcut/errors.hpp"
#include "isingcut/exact.hpp"
#include "isingcut/harness.hpp"
#include "isingcut/io.hpp"
#include "isingcut/solver.hpp"
#include "isingcut/synthetic.hpp"

namespace {

using namespace isingcut;

// Bad arguments, as opposed to failures inside the numerics.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_num(double x) { return fmt::format("{:.12g}", x); }

struct GenArgs {
  std::string graph = "random_sparse";
  int p = 0;
  int n_edges = 0;
  int max_degree = 0;
  int block_size = 8;
  int n_blocks = 0;
  int rows = 0;
  int cols = 0;
  double xi = 0.5;
  std::uint64_t seed = 1;
  std::string out;
};

struct SampleArgs {
  std::string model;
  int n = 0;
  int burn_in = 1000;
  int thin = 5;
  std::uint64_t seed = 1;
  std::string out;
};

struct FitArgs {
  std::string data;
  std::string method = "logdet-cut";
  std::string lambda = "auto";
  int max_rounds = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string cuts_out;
};

struct EvalArgs {
  std::string fit;
  std::string truth;
  std::string test;
  std::string out;
  double edge_tol = 1e-4;
};

struct OracleArgs {
  std::string model;
  bool logz = false;
  bool marginals = false;
};

struct ExperimentArgs {
  std::string config;
  std::string out;
  int workers = 0;
};

void run_gen(const GenArgs& a) {
  GraphSpec spec;
  try {
    spec.kind = parse_graph_kind(a.graph);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.p = a.p;
  spec.n_edges = a.n_edges;
  spec.max_degree = a.max_degree;
  spec.block_size = a.block_size;
  spec.n_blocks = a.n_blocks;
  spec.rows = a.rows;
  spec.cols = a.cols;
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto edges = make_graph(spec, derive_seed(a.seed, {1}));
  const auto model = assign_parameters(spec.p, edges, a.xi, derive_seed(a.seed, {2}));
  if (a.out.empty()) {
    write_model(std::cout, model, a.seed);
  } else {
    write_model_file(a.out, model, a.seed);
  }
}

void run_sample(const SampleArgs& a) {
  const auto mf = read_model_file(a.model);
  SamplerConfig sc;
  sc.n = a.n;
  sc.burn_in = a.burn_in;
  sc.thin = a.thin;
  sc.seed = a.seed;
  const Dataset data = gibbs_sample(mf.model, sc);
  if (a.out.empty()) {
    write_samples(std::cout, data);
  } else {
    write_samples_file(a.out, data);
  }
}

void run_fit(const FitArgs& a) {
  Method method;
  LambdaRule rule;
  try {
    method = parse_method(a.method);
    rule = parse_lambda(a.lambda);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Dataset data = read_samples_file(a.data);
  const double lambda = rule.resolve(data.p, data.n);
  FitOptions opts;
  opts.max_rounds = a.max_rounds;
  const MethodFit f = fit_method(method, data, lambda, opts);

  FitRecord rec;
  rec.method = to_string(method);
  rec.lambda = lambda;
  rec.seed = a.seed;
  rec.fitted_means = f.fitted_means;
  rec.cuts = f.cuts;
  rec.cut_violations = f.cut_violations;
  rec.rounds = f.rounds;
  rec.round_objectives = f.round_objectives;
  rec.objective = f.objective;
  rec.converged = f.converged;
  nlohmann::json cfg{{"method", rec.method},        {"lambda_rule", a.lambda}, {"lambda", lambda},
                     {"max_rounds", a.max_rounds}, {"edge_tol", opts.edge_tol}, {"data", a.data},
                     {"n", data.n}};
  if (method == Method::kPlMin || method == Method::kPlMax) cfg["penalty_scale"] = "logistic";
  rec.config_json = cfg.dump();
  if (a.out.empty()) {
    write_fit(std::cout, f.model, rec);
  } else {
    write_fit_file(a.out, f.model, rec);
  }
  if (!a.cuts_out.empty()) {
    std::ofstream out(a.cuts_out);
    if (!out) throw FormatError("cannot write " + a.cuts_out);
    write_cuts(out, f.cuts, f.cut_violations);
  }
}

void run_eval(const EvalArgs& a) {
  if (a.truth.empty() && a.test.empty()) throw UsageError("eval needs --truth and/or --test");
  const auto fitted = read_model_file(a.fit);
  const auto cuts = read_fit_cuts_file(a.fit);
  std::string method = "unknown";
  {
    std::ifstream in(a.fit);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_object() && j.contains("method") && j["method"].is_string()) method = j["method"].get<std::string>();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double precision = nan, recall = nan, l2 = nan, test_own = nan, test_none = nan;
  int true_count = -1;
  const auto est_edges = edge_set(fitted.model, a.edge_tol);
  if (!a.truth.empty()) {
    const auto truth = read_model_file(a.truth);
    if (truth.model.p() != fitted.model.p()) throw FormatError("fit and truth have different p");
    const auto true_edges = edge_set(truth.model, 0.0);
    const auto pr = precision_recall(est_edges, true_edges);
    precision = pr.precision;
    recall = pr.recall;
    l2 = l2_param_error(fitted.model, truth.model);
    true_count = static_cast<int>(true_edges.size());
  }
  if (!a.test.empty()) {
    const Dataset test = read_samples_file(a.test);
    if (test.p != fitted.model.p()) throw FormatError("fit and test data have different p");
    const MeanVector eta = empirical_means(test);
    test_none = surrogate_loglik(fitted.model, eta, {});
    test_own = cuts.empty() ? test_none : surrogate_loglik(fitted.model, eta, cuts);
  }
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw FormatError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  out << "method,p,precision,recall,edge_count,true_edge_count,l2_error,test_loglik_own_cuts,test_loglik_no_cuts,"
         "cuts\n";
  out << method << "," << fitted.model.p() << "," << fmt_num(precision) << "," << fmt_num(recall) << ","
      << est_edges.size() << "," << true_count << "," << fmt_num(l2) << "," << fmt_num(test_own) << ","
      << fmt_num(test_none) << "," << cuts.size() << "\n";
}

void run_oracle(const OracleArgs& a) {
  if (a.logz == a.marginals) throw UsageError("oracle needs exactly one of --logz or --marginals");
  const auto mf = read_model_file(a.model);
  if (a.logz) {
    std::cout << "logz=" << fmt_num(exact_log_partition(mf.model)) << "\n";
    return;
  }
  const MeanVector eta = exact_mean_parameters(mf.model);
  const int p = eta.p();
  for (int v = 0; v < p; ++v) std::cout << "eta_" << v << "=" << fmt_num(eta.node(v)) << "\n";
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) std::cout << "eta_" << u << "_" << v << "=" << fmt_num(eta.pair(u, v)) << "\n";
  }
}

void run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(a.config);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.workers > 0) cfg.workers = a.workers;
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto result = run_and_write(cfg);
  int errors = 0;
  for (const auto& row : result.rows) errors += row.status == "ok" ? 0 : 1;
  std::cout << "rows=" << result.rows.size() << "\n";
  std::cout << "error_rows=" << errors << "\n";
  if (result.rate) std::cout << "slope=" << fmt_num(result.rate->slope) << "\n";
  std::cout << "output_dir=" << cfg.output_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Ising model learning with a log-determinant surrogate and cycle-inequality cuts"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a random graph and parameters, write a model file");
  g->add_option("--graph", gen.graph, "grid4 | random_sparse | dense_subgraphs")->capture_default_str();
  g->add_option("--p", gen.p, "Number of variables")->required();
  g->add_option("--n-edges", gen.n_edges, "Edge count (random_sparse, dense_subgraphs)");
  g->add_option("--max-degree", gen.max_degree, "Degree cap for random_sparse, 0 = none");
  g->add_option("--block-size", gen.block_size, "Clique size for dense_subgraphs")->capture_default_str();
  g->add_option("--n-blocks", gen.n_blocks, "Number of cliques for dense_subgraphs");
  g->add_option("--rows", gen.rows, "Grid rows");
  g->add_option("--cols", gen.cols, "Grid columns");
  g->add_option("--xi", gen.xi, "Coupling scale: theta_uv ~ U[-xi, xi]")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output model file (default stdout)");

  SampleArgs smp;
  auto* s = app.add_subcommand("sample", "Draw Gibbs samples from a model file");
  s->add_option("--model", smp.model, "Model file")->required();
  s->add_option("--n", smp.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  s->add_option("--burn-in", smp.burn_in, "Burn-in sweeps")->capture_default_str()->check(CLI::NonNegativeNumber);
  s->add_option("--thin", smp.thin, "Sweeps between kept samples")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", smp.seed, "Random seed")->capture_default_str();
  s->add_option("--out", smp.out, "Output samples file (default stdout)");

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Fit a model to a samples file");
  f->add_option("--data", fa.data, "Samples file")->required();
  f->add_option("--method", fa.method, "logdet-cut | logdet | pl-min | pl-max")->capture_default_str();
  f->add_option("--lambda", fa.lambda, "auto or a nonnegative number")->capture_default_str();
  f->add_option("--max-rounds", fa.max_rounds, "Cutting-plane rounds")->capture_default_str()->check(
      CLI::PositiveNumber);
  f->add_option("--seed", fa.seed, "Seed recorded in the fit file (the fit itself is deterministic)");
  f->add_option("--out", fa.out, "Output fit file (default stdout)");
  f->add_option("--cuts-out", fa.cuts_out, "Optional cut dump, one line per cut");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Score a fit against a true model and/or test data");
  e->add_option("--fit", ea.fit, "Fit file")->required();
  e->add_option("--truth", ea.truth, "True model file");
  e->add_option("--test", ea.test, "Held-out samples file");
  e->add_option("--edge-tol", ea.edge_tol, "Coupling magnitude counted as an edge")->capture_default_str();
  e->add_option("--out", ea.out, "Metrics CSV (default stdout)");

  OracleArgs oa;
  auto* o = app.add_subcommand("oracle", "Exact log-partition or marginals by enumeration");
  o->add_option("--model", oa.model, "Model file")->required();
  o->add_flag("--logz", oa.logz, "Print the log-partition function");
  o->add_flag("--marginals", oa.marginals, "Print node and pair means");

  ExperimentArgs xa;
  auto* x = app.add_subcommand("experiment", "Run an experiment config and write a results directory");
  x->add_option("--config", xa.config, "Experiment config (JSON)")->required();
  x->add_option("--out", xa.out, "Override the output directory");
  x->add_option("--workers", xa.workers, "Override the worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) run_gen(gen);
    if (*s) run_sample(smp);
    if (*f) run_fit(fa);
    if (*e) run_eval(ea);
    if (*o) run_oracle(oa);
    if (*x) run_experiment_cmd(xa);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
