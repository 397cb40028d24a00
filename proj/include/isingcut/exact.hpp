#pragma once

#include "isingcut/dataset.hpp"
#include "isingcut/model.hpp"

namespace isingcut {

/// Upper bound on p for brute-force enumeration of all 2^p states.
struct OracleLimit {
  int max_p = 16;
};

/// log sum_x exp(<theta, phi(x)>), enumerated and stabilized by the maximal
/// exponent. Throws NumericalError when p exceeds the limit.
double exact_log_partition(const IsingModel& model, OracleLimit limit = {});

/// Exact expectations of all node and pair statistics.
MeanVector exact_mean_parameters(const IsingModel& model, OracleLimit limit = {});

/// <theta, eta_hat> - A(theta) for the empirical moments of data.
double exact_avg_loglik(const IsingModel& model, const Dataset& data, OracleLimit limit = {});

}  // namespace isingcut
