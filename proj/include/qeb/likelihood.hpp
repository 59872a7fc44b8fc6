#pragma once

#include <limits>
#include <span>
#include <vector>

#include "qeb/statespace.hpp"
#include "qeb/tomodata.hpp"

namespace qeb {

/// Returned by log_likelihood when an observed effect has (numerically) zero probability.
inline constexpr double kInfiniteLogLikelihood = std::numeric_limits<double>::infinity();

/// Probabilities below this count as zero for effects with n_k > 0.
inline constexpr double kMinProbability = 1e-300;

/// lambda(rho) = -2 sum_k n_k ln tr(E_k rho).
///
/// Throws std::invalid_argument on a dimension mismatch. Returns kInfiniteLogLikelihood
/// if tr(E_k rho) < 1e-300 for some k with n_k > 0.
double log_likelihood(const DensityMatrix& rho, const TomographyDataset& data);

/// lambda(rho_new) - lambda(rho_old). Never needs the normalization of the estimate density.
double log_likelihood_ratio(const DensityMatrix& rho_new, const DensityMatrix& rho_old,
                            const TomographyDataset& data);

/// Precomputed evaluator for the random walk.
///
/// Hermitian matrices are packed into d^2 reals (diagonal, then sqrt(2) Re and
/// sqrt(2) Im of the strict upper triangle) so that tr(E rho) is a dot product.
/// Zero-count effects are dropped since they do not contribute.
class LikelihoodEvaluator {
 public:
  explicit LikelihoodEvaluator(const TomographyDataset& data);

  int dim() const { return dim_; }

  /// lambda for the state encoded by StatePoint coordinates (see StatePoint for the layout).
  /// `scratch` must hold at least dim^2 doubles.
  double from_coords(std::span<const double> coords, std::span<double> scratch) const;
  double from_coords(std::span<const double> coords) const;

  double from_rho(const DensityMatrix& rho) const;

 private:
  double from_packed(std::span<const double> packed) const;

  int dim_;
  std::size_t packed_size_;
  std::vector<double> effects_;  // row k = packed E_k
  std::vector<double> counts_;
};

/// Packs a Hermitian matrix as described on LikelihoodEvaluator.
std::vector<double> pack_hermitian(const CMatrix& m);

}  // namespace qeb
