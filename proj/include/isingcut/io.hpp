#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isingcut/dataset.hpp"
#include "isingcut/model.hpp"
#include "isingcut/separation.hpp"

namespace isingcut {

/// Raised for malformed or inconsistent input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFile {
  IsingModel model{1};
  std::optional<std::uint64_t> seed;
};

/// JSON object {"p", "seed"?, "nodes": [theta_v], "edges": [[u, v, theta_uv]]}
/// with 0-based u < v. Extra keys are ignored, so fit files read as models.
void write_model(std::ostream& out, const IsingModel& model, std::optional<std::uint64_t> seed = std::nullopt);
ModelFile read_model(std::istream& in);
ModelFile read_model_file(const std::string& path);
void write_model_file(const std::string& path, const IsingModel& model,
                      std::optional<std::uint64_t> seed = std::nullopt);

/// "# p=<p> n=<n> seed=<seed>" then n rows of p tokens from {-1, 1, +1}.
void write_samples(std::ostream& out, const Dataset& data);
Dataset read_samples(std::istream& in);
Dataset read_samples_file(const std::string& path);
void write_samples_file(const std::string& path, const Dataset& data);

/// Everything written to a fit file besides the model itself.
struct FitRecord {
  std::string method;
  double lambda = 0.0;
  std::optional<std::uint64_t> seed;
  std::optional<MeanVector> fitted_means;
  std::vector<CycleInequality> cuts;
  std::vector<double> cut_violations;
  int rounds = 0;
  std::vector<double> round_objectives;
  double objective = 0.0;
  bool converged = true;
  std::string config_json;  // echo of the settings, as a JSON object
};

void write_fit(std::ostream& out, const IsingModel& model, const FitRecord& record);
void write_fit_file(const std::string& path, const IsingModel& model, const FitRecord& record);
/// Cuts stored in a fit file, rebuilt from their cycles and odd sets.
std::vector<CycleInequality> read_fit_cuts(std::istream& in);
std::vector<CycleInequality> read_fit_cuts_file(const std::string& path);

/// One line per cut: cycle vertices, odd edge set, rhs, violation when added.
void write_cuts(std::ostream& out, const std::vector<CycleInequality>& cuts, const std::vector<double>& violations);

}  // namespace isingcut
