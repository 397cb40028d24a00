#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isingcut/baselines.hpp"
#include "isingcut/dataset.hpp"
#include "isingcut/model.hpp"
#include "isingcut/separation.hpp"
#include "isingcut/solver.hpp"
#include "isingcut/synthetic.hpp"

namespace isingcut {

inline constexpr const char* kVersion = "0.1.0";

struct PrecisionRecall {
  double precision = 0.0;  // NaN when no edges were estimated
  double recall = 0.0;     // NaN when the true edge set is empty
  bool precision_undefined = false;
  bool recall_undefined = false;
};

/// Both inputs are edge lists over the same p; duplicates are ignored.
PrecisionRecall precision_recall(const std::vector<Edge>& estimated, const std::vector<Edge>& truth);

/// Euclidean distance over node fields and all pair couplings.
double l2_param_error(const IsingModel& a, const IsingModel& b);

enum class Method { kLogdetCut, kLogdet, kPlMin, kPlMax };

std::string to_string(Method method);
/// Accepts logdet-cut, logdet, pl-min, pl-max; throws std::invalid_argument otherwise.
Method parse_method(const std::string& name);

/// lambda = scale * sqrt(log p / n) when automatic, else value.
struct LambdaRule {
  bool automatic = true;
  double scale = 2.0;
  double value = 0.0;
  double resolve(int p, int n) const;
};

/// Parses "auto" or a nonnegative number.
LambdaRule parse_lambda(const std::string& text);

/// A fitted estimate from any method, with the solver output when there is one.
struct MethodFit {
  Method method = Method::kLogdetCut;
  IsingModel model{1};
  double lambda = 0.0;
  std::vector<CycleInequality> cuts;
  std::vector<double> cut_violations;
  int rounds = 0;
  std::vector<double> round_objectives;
  double objective = 0.0;
  bool converged = true;
  double wall_time = 0.0;
  std::optional<MeanVector> fitted_means;
};

struct FitOptions {
  int max_rounds = 10;
  double edge_tol = 1e-4;
};

/// Runs one method on a dataset. The pseudo-likelihood methods reuse a shared
/// asymmetric estimate when one is passed in.
MethodFit fit_method(Method method, const Dataset& data, double lambda, const FitOptions& opts = {},
                     const AsymmetricEstimate* pseudo = nullptr);

enum class ExperimentKind { kStructure, kLikelihood, kRate };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kStructure;
  GraphSpec graph;
  std::vector<double> xis;
  std::vector<int> ns;
  LambdaRule lambda;
  std::vector<Method> methods{Method::kLogdetCut, Method::kLogdet, Method::kPlMin, Method::kPlMax};
  int replicates = 10;
  std::uint64_t base_seed = 1;
  int burn_in = 1000;
  int thin = 5;
  int workers = 1;
  int max_rounds = 10;
  double edge_tol = 1e-4;
  bool evaluate_likelihood = false;  // forced on for likelihood experiments
  bool write_fits = false;
  std::string output_dir = "results";
  double reference_lambda = 1e-6;  // rate experiment only
};

/// Throws std::invalid_argument on empty lists, replicates < 1 and the like.
void validate(const ExperimentConfig& cfg);

/// JSON object mirroring the struct fields; the graph lives under "graph".
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
  std::string method;
  int p = 0;
  int n = 0;
  double xi = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;  // training-data seed
  double lambda = 0.0;
  std::string status = "ok";
  double precision = 0.0;
  double recall = 0.0;
  int edge_count = 0;
  int true_edge_count = 0;
  double l2_error = 0.0;
  double train_loglik_own_cuts = 0.0;
  double test_loglik_own_cuts = 0.0;
  double train_loglik_no_cuts = 0.0;
  double test_loglik_no_cuts = 0.0;
  int cuts_added = 0;
  int rounds = 0;
  double wall_time = 0.0;
  std::string error;
};

/// Fixed column order of results.csv.
const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct RateSummary {
  std::vector<int> ns;
  std::vector<double> median_error;
  double slope = 0.0;  // least-squares slope of log median error against log n
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::optional<RateSummary> rate;
};

ExperimentResult run_structure_experiment(const ExperimentConfig& cfg);
ExperimentResult run_likelihood_experiment(const ExperimentConfig& cfg);
ExperimentResult run_rate_experiment(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs the experiment and writes results.csv, manifest.json and, for rate
/// experiments, rate_summary.csv into cfg.output_dir (created if missing).
ExperimentResult run_and_write(const ExperimentConfig& cfg);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace isingcut
