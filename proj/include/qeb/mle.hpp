#pragma once

#include <cstdint>
#include <vector>

#include "qeb/statespace.hpp"
#include "qeb/tomodata.hpp"

namespace qeb {

struct MleOptions {
  double tol = 1e-10;  // stop when an accepted step lowers lambda by less than this
  std::int64_t max_iter = 100000;
  bool record_history = false;
};

struct MleResult {
  DensityMatrix state;
  double log_likelihood;
  std::int64_t iterations;
  bool converged;
  std::vector<double> history;  // lambda after each accepted iterate (with record_history)
};

/// Maximum-likelihood state by the diluted R rho R iteration
///   rho' ~ (I + e R) rho (I + e R),  R = sum_k (n_k / n) E_k / tr(E_k rho),
/// starting from the maximally mixed state. The dilution e starts large (plain R rho R)
/// and is halved until lambda does not increase, so lambda is monotone along iterates.
/// On non-convergence the best iterate is returned with converged = false.
MleResult mle(const TomographyDataset& data, const MleOptions& options = {});

}  // namespace qeb
