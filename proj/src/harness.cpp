#include "isingcut/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "isingcut/errors.hpp"
#include "isingcut/exact.hpp"
#include "isingcut/io.hpp"

namespace isingcut {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tags that keep the seed streams of the different random draws apart.
enum SeedStream : std::uint64_t { kGraphStream = 1, kParamStream = 2, kTrainStream = 3, kTestStream = 4 };

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SolverConfig solver_config(Method method, double lambda, const FitOptions& opts) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.max_outer_rounds = opts.max_rounds;
  cfg.separate_cuts = method == Method::kLogdetCut;
  cfg.edge_tol = opts.edge_tol;
  return cfg;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.12g}", x);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Runs body(i) for i in [0, count) on up to `workers` threads.
template <class Body>
void parallel_for(int count, int workers, Body body) {
  const int threads = std::clamp(workers, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

IsingModel make_true_model(const ExperimentConfig& cfg, std::size_t xi_index, int replicate) {
  const auto x = static_cast<std::uint64_t>(xi_index);
  const auto r = static_cast<std::uint64_t>(replicate);
  const auto edges = make_graph(cfg.graph, derive_seed(cfg.base_seed, {kGraphStream, x, r}));
  return assign_parameters(cfg.graph.p, edges, cfg.xis[xi_index], derive_seed(cfg.base_seed, {kParamStream, x, r}));
}

Dataset sample(const IsingModel& model, const ExperimentConfig& cfg, int n, std::uint64_t seed) {
  SamplerConfig sc;
  sc.n = n;
  sc.burn_in = cfg.burn_in;
  sc.thin = cfg.thin;
  sc.seed = seed;
  return gibbs_sample(model, sc);
}

// Surrogate average log-likelihood; NaN with a note when the surrogate fails.
double safe_loglik(const IsingModel& model, const MeanVector& eta, const std::vector<CycleInequality>& cuts,
                   std::string& note) {
  try {
    return surrogate_loglik(model, eta, cuts);
  } catch (const std::exception& e) {
    if (note.empty()) note = std::string("surrogate evaluation failed: ") + e.what();
    return kNaN;
  }
}

std::string fit_config_json(const FitOptions& opts, Method method) {
  json j;
  j["method"] = to_string(method);
  j["max_rounds"] = opts.max_rounds;
  j["edge_tol"] = opts.edge_tol;
  if (method == Method::kPlMin || method == Method::kPlMax) j["penalty_scale"] = "logistic";
  return j.dump();
}

struct CellSpec {
  std::size_t xi_index = 0;
  std::size_t n_index = 0;
  int replicate = 0;
};

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  for (std::size_t x = 0; x < cfg.xis.size(); ++x) {
    for (std::size_t k = 0; k < cfg.ns.size(); ++k) {
      for (int r = 0; r < cfg.replicates; ++r) cells.push_back({x, k, r});
    }
  }
  return cells;
}

void maybe_write_fit(const ExperimentConfig& cfg, const MethodFit& fit, const CellSpec& cell, int n,
                     std::uint64_t seed, const FitOptions& opts) {
  if (!cfg.write_fits) return;
  const auto dir = std::filesystem::path(cfg.output_dir) / "fits";
  std::filesystem::create_directories(dir);
  FitRecord rec;
  rec.method = to_string(fit.method);
  rec.lambda = fit.lambda;
  rec.seed = seed;
  rec.fitted_means = fit.fitted_means;
  rec.cuts = fit.cuts;
  rec.cut_violations = fit.cut_violations;
  rec.rounds = fit.rounds;
  rec.round_objectives = fit.round_objectives;
  rec.objective = fit.objective;
  rec.converged = fit.converged;
  rec.config_json = fit_config_json(opts, fit.method);
  const auto name = fmt::format("{}_xi{}_n{}_r{}.json", rec.method, cell.xi_index, n, cell.replicate);
  write_fit_file((dir / name).string(), fit.model, rec);
}

std::vector<ResultRow> run_cell(const ExperimentConfig& cfg, const CellSpec& cell, bool with_likelihood) {
  const int n = cfg.ns[cell.n_index];
  const double xi = cfg.xis[cell.xi_index];
  const auto x = static_cast<std::uint64_t>(cell.xi_index);
  const auto k = static_cast<std::uint64_t>(cell.n_index);
  const auto r = static_cast<std::uint64_t>(cell.replicate);
  const std::uint64_t train_seed = derive_seed(cfg.base_seed, {kTrainStream, x, k, r});
  const std::uint64_t test_seed = derive_seed(cfg.base_seed, {kTestStream, x, k, r});
  const double lambda = cfg.lambda.resolve(cfg.graph.p, n);

  auto blank_row = [&](Method m) {
    ResultRow row;
    row.method = to_string(m);
    row.p = cfg.graph.p;
    row.n = n;
    row.xi = xi;
    row.replicate = cell.replicate;
    row.seed = train_seed;
    row.lambda = lambda;
    row.precision = row.recall = row.l2_error = kNaN;
    row.train_loglik_own_cuts = row.test_loglik_own_cuts = kNaN;
    row.train_loglik_no_cuts = row.test_loglik_no_cuts = kNaN;
    return row;
  };
  auto error_rows = [&](const std::string& msg) {
    std::vector<ResultRow> rows;
    for (const Method m : cfg.methods) {
      auto row = blank_row(m);
      row.status = "error";
      row.error = msg;
      rows.push_back(std::move(row));
    }
    return rows;
  };

  IsingModel truth(1);
  Dataset train;
  std::optional<Dataset> test;
  try {
    truth = make_true_model(cfg, cell.xi_index, cell.replicate);
    train = sample(truth, cfg, n, train_seed);
    if (with_likelihood) test = sample(truth, cfg, n, test_seed);
  } catch (const std::exception& e) {
    return error_rows(std::string("data generation failed: ") + e.what());
  }
  const auto true_edges = edge_set(truth, 0.0);
  const MeanVector train_eta = empirical_means(train);
  const std::optional<MeanVector> test_eta = test ? std::optional<MeanVector>(empirical_means(*test)) : std::nullopt;

  FitOptions opts;
  opts.max_rounds = cfg.max_rounds;
  opts.edge_tol = cfg.edge_tol;

  std::optional<AsymmetricEstimate> pseudo;
  std::string pseudo_error;
  const bool needs_pseudo = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                        [](Method m) { return m == Method::kPlMin || m == Method::kPlMax; });
  if (needs_pseudo) {
    try {
      pseudo = fit_pseudo(train, lambda);
    } catch (const std::exception& e) {
      pseudo_error = e.what();
    }
  }

  std::vector<ResultRow> rows;
  for (const Method m : cfg.methods) {
    ResultRow row = blank_row(m);
    row.true_edge_count = static_cast<int>(true_edges.size());
    try {
      const bool is_pl = m == Method::kPlMin || m == Method::kPlMax;
      if (is_pl && !pseudo) throw std::runtime_error(pseudo_error);
      const MethodFit fit = fit_method(m, train, lambda, opts, is_pl ? &*pseudo : nullptr);
      const auto est_edges = edge_set(fit.model, cfg.edge_tol);
      const auto pr = precision_recall(est_edges, true_edges);
      row.precision = pr.precision;
      row.recall = pr.recall;
      row.edge_count = static_cast<int>(est_edges.size());
      row.l2_error = l2_param_error(fit.model, truth);
      row.cuts_added = static_cast<int>(fit.cuts.size());
      row.rounds = fit.rounds;
      row.wall_time = fit.wall_time;
      if (!fit.converged) row.error = "solver did not reach its tolerance";
      if (with_likelihood) {
        std::string note;
        row.train_loglik_no_cuts = safe_loglik(fit.model, train_eta, {}, note);
        row.test_loglik_no_cuts = safe_loglik(fit.model, *test_eta, {}, note);
        if (fit.cuts.empty()) {
          row.train_loglik_own_cuts = row.train_loglik_no_cuts;
          row.test_loglik_own_cuts = row.test_loglik_no_cuts;
        } else {
          row.train_loglik_own_cuts = safe_loglik(fit.model, train_eta, fit.cuts, note);
          row.test_loglik_own_cuts = safe_loglik(fit.model, *test_eta, fit.cuts, note);
        }
        if (!note.empty()) row.error = row.error.empty() ? note : row.error + "; " + note;
      }
      maybe_write_fit(cfg, fit, cell, n, train_seed, opts);
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentResult run_grid(const ExperimentConfig& cfg, bool with_likelihood) {
  validate(cfg);
  const auto cells = enumerate_cells(cfg);
  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    per_cell[static_cast<std::size_t>(i)] = run_cell(cfg, cells[static_cast<std::size_t>(i)], with_likelihood);
  });
  ExperimentResult result;
  for (auto& rows : per_cell) {
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  return result;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

PrecisionRecall precision_recall(const std::vector<Edge>& estimated, const std::vector<Edge>& truth) {
  std::set<Edge> est;
  std::set<Edge> tru;
  for (const auto& e : estimated) est.insert(make_edge(e.u, e.v));
  for (const auto& e : truth) tru.insert(make_edge(e.u, e.v));
  std::size_t hits = 0;
  for (const auto& e : est) hits += tru.contains(e) ? 1 : 0;

  PrecisionRecall pr;
  if (est.empty()) {
    pr.precision = kNaN;
    pr.precision_undefined = true;
  } else {
    pr.precision = static_cast<double>(hits) / static_cast<double>(est.size());
  }
  if (tru.empty()) {
    pr.recall = kNaN;
    pr.recall_undefined = true;
  } else {
    pr.recall = static_cast<double>(hits) / static_cast<double>(tru.size());
  }
  return pr;
}

double l2_param_error(const IsingModel& a, const IsingModel& b) {
  if (a.p() != b.p()) throw std::invalid_argument("models have different p");
  return (parameter_vector(a) - parameter_vector(b)).norm();
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kLogdetCut:
      return "logdet-cut";
    case Method::kLogdet:
      return "logdet";
    case Method::kPlMin:
      return "pl-min";
    case Method::kPlMax:
      return "pl-max";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const Method m : {Method::kLogdetCut, Method::kLogdet, Method::kPlMin, Method::kPlMax}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

double LambdaRule::resolve(int p, int n) const {
  if (!automatic) return value;
  if (p < 2 || n < 1) throw std::invalid_argument("automatic lambda needs p >= 2 and n >= 1");
  return scale * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

LambdaRule parse_lambda(const std::string& text) {
  LambdaRule rule;
  if (text == "auto") return rule;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("lambda must be 'auto' or a number, got '" + text + "'");
  }
  if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("lambda must be 'auto' or a nonnegative number, got '" + text + "'");
  }
  rule.automatic = false;
  rule.value = v;
  return rule;
}

MethodFit fit_method(Method method, const Dataset& data, double lambda, const FitOptions& opts,
                     const AsymmetricEstimate* pseudo) {
  MethodFit out;
  out.method = method;
  out.lambda = lambda;
  if (method == Method::kLogdetCut || method == Method::kLogdet) {
    const FitResult fr = fit(empirical_means(data), solver_config(method, lambda, opts));
    out.model = fr.model;
    out.cuts = fr.cuts;
    out.cut_violations = fr.cut_violations;
    out.rounds = fr.rounds;
    out.round_objectives = fr.round_objectives;
    out.objective = fr.objective;
    out.converged = fr.state.diagnostics.converged;
    out.wall_time = fr.wall_time;
    out.fitted_means = fr.fitted_means;
    return out;
  }
  std::optional<AsymmetricEstimate> own;
  if (!pseudo) {
    own = fit_pseudo(data, lambda);
    pseudo = &*own;
  }
  const auto mode = method == Method::kPlMin ? SymmetrizeMode::kMin : SymmetrizeMode::kMax;
  const auto start = std::chrono::steady_clock::now();
  out.model = symmetrize(*pseudo, mode, opts.edge_tol);
  out.wall_time = pseudo->wall_time + seconds_since(start);
  out.converged = pseudo->converged;
  out.rounds = 1;
  return out;
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kStructure:
      return "structure";
    case ExperimentKind::kLikelihood:
      return "likelihood";
    case ExperimentKind::kRate:
      return "rate";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto k : {ExperimentKind::kStructure, ExperimentKind::kLikelihood, ExperimentKind::kRate}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.graph);
  require(!cfg.xis.empty(), "xis must not be empty");
  require(!cfg.ns.empty(), "ns must not be empty");
  require(!cfg.methods.empty(), "methods must not be empty");
  require(cfg.replicates >= 1, "replicates must be >= 1");
  require(cfg.workers >= 1, "workers must be >= 1");
  require(cfg.max_rounds >= 1, "max_rounds must be >= 1");
  require(cfg.burn_in >= 0 && cfg.thin >= 1, "burn_in must be >= 0 and thin >= 1");
  for (const double xi : cfg.xis) require(std::isfinite(xi) && xi >= 0.0, "xi values must be finite and >= 0");
  for (const int n : cfg.ns) require(n >= 1, "n values must be >= 1");
  if (!cfg.lambda.automatic) require(cfg.lambda.value >= 0.0, "lambda must be >= 0");
  if (cfg.kind == ExperimentKind::kRate) {
    require(cfg.graph.p <= OracleLimit{}.max_p, "rate experiment needs p within the exact-oracle limit");
    require(cfg.methods.front() == Method::kLogdetCut || cfg.methods.front() == Method::kLogdet,
            "rate experiment needs a log-det method first in the method list");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known{"kind", "graph", "xis", "ns", "lambda", "lambda_scale", "methods",
                                           "replicates", "base_seed", "burn_in", "thin", "workers", "max_rounds",
                                           "edge_tol", "evaluate_likelihood", "write_fits", "output_dir",
                                           "reference_lambda"};
  for (const auto& [key, value] : j.items()) require(known.contains(key), "unknown config key '" + key + "'");

  ExperimentConfig cfg;
  try {
    if (j.contains("kind")) cfg.kind = parse_experiment_kind(j["kind"].get<std::string>());
    require(j.contains("graph") && j["graph"].is_object(), "config needs a graph object");
    const json& g = j["graph"];
    static const std::set<std::string> graph_keys{"kind",     "p",          "n_edges", "max_degree",
                                                  "block_size", "n_blocks", "rows",    "cols"};
    for (const auto& [key, value] : g.items()) require(graph_keys.contains(key), "unknown graph key '" + key + "'");
    cfg.graph.kind = parse_graph_kind(g.at("kind").get<std::string>());
    cfg.graph.p = g.at("p").get<int>();
    cfg.graph.n_edges = g.value("n_edges", 0);
    cfg.graph.max_degree = g.value("max_degree", 0);
    cfg.graph.block_size = g.value("block_size", 8);
    cfg.graph.n_blocks = g.value("n_blocks", 0);
    cfg.graph.rows = g.value("rows", 0);
    cfg.graph.cols = g.value("cols", 0);
    cfg.xis = j.at("xis").get<std::vector<double>>();
    cfg.ns = j.at("ns").get<std::vector<int>>();
    if (j.contains("lambda")) {
      const json& l = j["lambda"];
      cfg.lambda = l.is_string() ? parse_lambda(l.get<std::string>()) : parse_lambda(fmt::format("{}", l.get<double>()));
    }
    if (j.contains("lambda_scale")) cfg.lambda.scale = j["lambda_scale"].get<double>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"]) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.thin = j.value("thin", cfg.thin);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
    cfg.edge_tol = j.value("edge_tol", cfg.edge_tol);
    cfg.evaluate_likelihood = j.value("evaluate_likelihood", cfg.evaluate_likelihood);
    cfg.write_fits = j.value("write_fits", cfg.write_fits);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.reference_lambda = j.value("reference_lambda", cfg.reference_lambda);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = to_string(cfg.kind);
  j["graph"] = {{"kind", to_string(cfg.graph.kind)}, {"p", cfg.graph.p},
                {"n_edges", cfg.graph.n_edges},      {"max_degree", cfg.graph.max_degree},
                {"block_size", cfg.graph.block_size}, {"n_blocks", cfg.graph.n_blocks},
                {"rows", cfg.graph.rows},             {"cols", cfg.graph.cols}};
  j["xis"] = cfg.xis;
  j["ns"] = cfg.ns;
  if (cfg.lambda.automatic) {
    j["lambda"] = "auto";
    j["lambda_scale"] = cfg.lambda.scale;
  } else {
    j["lambda"] = cfg.lambda.value;
  }
  std::vector<std::string> methods;
  for (const Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["replicates"] = cfg.replicates;
  j["base_seed"] = cfg.base_seed;
  j["burn_in"] = cfg.burn_in;
  j["thin"] = cfg.thin;
  j["workers"] = cfg.workers;
  j["max_rounds"] = cfg.max_rounds;
  j["edge_tol"] = cfg.edge_tol;
  j["evaluate_likelihood"] = cfg.evaluate_likelihood;
  j["write_fits"] = cfg.write_fits;
  j["output_dir"] = cfg.output_dir;
  j["reference_lambda"] = cfg.reference_lambda;
  return j.dump(2);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "method",         "p",          "n",          "xi",
      "replicate",      "seed",       "lambda",     "status",
      "precision",      "recall",     "edge_count", "true_edge_count",
      "l2_error",       "train_loglik_own_cuts",  "test_loglik_own_cuts", "train_loglik_no_cuts",
      "test_loglik_no_cuts", "cuts_added", "rounds", "wall_time",
      "error"};
  return cols;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields{csv_quote(r.method),
                                          std::to_string(r.p),
                                          std::to_string(r.n),
                                          format_double(r.xi),
                                          std::to_string(r.replicate),
                                          std::to_string(r.seed),
                                          format_double(r.lambda),
                                          csv_quote(r.status),
                                          format_double(r.precision),
                                          format_double(r.recall),
                                          std::to_string(r.edge_count),
                                          std::to_string(r.true_edge_count),
                                          format_double(r.l2_error),
                                          format_double(r.train_loglik_own_cuts),
                                          format_double(r.test_loglik_own_cuts),
                                          format_double(r.train_loglik_no_cuts),
                                          format_double(r.test_loglik_no_cuts),
                                          std::to_string(r.cuts_added),
                                          std::to_string(r.rounds),
                                          format_double(r.wall_time),
                                          csv_quote(r.error)};
    for (std::size_t c = 0; c < fields.size(); ++c) out << (c ? "," : "") << fields[c];
    out << "\n";
  }
}

ExperimentResult run_structure_experiment(const ExperimentConfig& cfg) {
  return run_grid(cfg, cfg.evaluate_likelihood);
}

ExperimentResult run_likelihood_experiment(const ExperimentConfig& cfg) { return run_grid(cfg, true); }

ExperimentResult run_rate_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Method method = cfg.methods.front();
  const int p = cfg.graph.p;
  const IsingModel truth = make_true_model(cfg, 0, 0);
  const MeanVector exact = exact_mean_parameters(truth);

  FitOptions opts;
  opts.max_rounds = cfg.max_rounds;
  opts.edge_tol = cfg.edge_tol;
  const IsingModel reference = fit(exact, solver_config(method, cfg.reference_lambda, opts)).model;
  const auto true_edges = edge_set(truth, 0.0);

  std::vector<CellSpec> cells;
  for (std::size_t k = 0; k < cfg.ns.size(); ++k) {
    for (int r = 0; r < cfg.replicates; ++r) cells.push_back({0, k, r});
  }
  std::vector<ResultRow> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const CellSpec& cell = cells[static_cast<std::size_t>(i)];
    const int n = cfg.ns[cell.n_index];
    ResultRow row;
    row.method = to_string(method);
    row.p = p;
    row.n = n;
    row.xi = cfg.xis.front();
    row.replicate = cell.replicate;
    row.seed = derive_seed(cfg.base_seed, {kTrainStream, 0, static_cast<std::uint64_t>(cell.n_index),
                                           static_cast<std::uint64_t>(cell.replicate)});
    row.lambda = cfg.lambda.resolve(p, n);
    row.true_edge_count = static_cast<int>(true_edges.size());
    row.train_loglik_own_cuts = row.test_loglik_own_cuts = kNaN;
    row.train_loglik_no_cuts = row.test_loglik_no_cuts = kNaN;
    try {
      const Dataset data = sample(truth, cfg, n, row.seed);
      const MethodFit f = fit_method(method, data, row.lambda, opts);
      const auto est_edges = edge_set(f.model, cfg.edge_tol);
      const auto pr = precision_recall(est_edges, true_edges);
      row.precision = pr.precision;
      row.recall = pr.recall;
      row.edge_count = static_cast<int>(est_edges.size());
      row.l2_error = l2_param_error(f.model, reference);
      row.cuts_added = static_cast<int>(f.cuts.size());
      row.rounds = f.rounds;
      row.wall_time = f.wall_time;
      if (!f.converged) row.error = "solver did not reach its tolerance";
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
      row.precision = row.recall = row.l2_error = kNaN;
    }
    rows[static_cast<std::size_t>(i)] = std::move(row);
  });

  RateSummary summary;
  std::vector<double> log_n;
  std::vector<double> log_err;
  for (std::size_t k = 0; k < cfg.ns.size(); ++k) {
    std::vector<double> errs;
    for (const auto& row : rows) {
      if (row.n == cfg.ns[k] && row.status == "ok") errs.push_back(row.l2_error);
    }
    const double med = median(errs);
    summary.ns.push_back(cfg.ns[k]);
    summary.median_error.push_back(med);
    if (std::isfinite(med) && med > 0.0) {
      log_n.push_back(std::log(static_cast<double>(cfg.ns[k])));
      log_err.push_back(std::log(med));
    }
  }
  summary.slope = log_n.size() >= 2 ? fit_slope(log_n, log_err) : kNaN;
  return {std::move(rows), std::move(summary)};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::kStructure:
      return run_structure_experiment(cfg);
    case ExperimentKind::kLikelihood:
      return run_likelihood_experiment(cfg);
    case ExperimentKind::kRate:
      return run_rate_experiment(cfg);
  }
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentResult run_and_write(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result = run_experiment(cfg);
  {
    std::ofstream out(dir / "results.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "results.csv").string());
    write_csv(out, result.rows);
  }
  if (result.rate) {
    std::ofstream out(dir / "rate_summary.csv");
    out << "n,median_l2_error\n";
    for (std::size_t k = 0; k < result.rate->ns.size(); ++k) {
      out << result.rate->ns[k] << "," << format_double(result.rate->median_error[k]) << "\n";
    }
    out << "# slope=" << format_double(result.rate->slope) << "\n";
  }
  json manifest;
  manifest["version"] = kVersion;
  manifest["rng"] = kRngName;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["rows"] = result.rows.size();
  manifest["csv_columns"] = csv_columns();
  manifest["lambda_convention"] = "log-det methods penalize theta; pl methods penalize the logistic scale 2*theta";
  if (result.rate) manifest["rate_slope"] = result.rate->slope;
  manifest["wall_time"] = seconds_since(start);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  return result;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct x values");
  return sxy / sxx;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace isingcut
