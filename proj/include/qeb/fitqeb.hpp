#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeb/figures.hpp"
#include "qeb/histstats.hpp"
#include "qeb/mle.hpp"
#include "qeb/tomodata.hpp"

namespace qeb {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ln mu(f) ~ -a2 x^2 - a1 x + m ln x + c with x = s (f - h).
struct FitParams {
  double a2 = 0.0;
  double a1 = 0.0;
  double m = 0.0;
  double c = 0.0;
  ModelVariables vars;

  // fit diagnostics; left at defaults for hand-specified parameters
  std::array<std::array<double, 2>, 4> bounds95{};  // (a2, a1, m, c)
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  int points_used = 0;
  int dof = 0;
  int iterations = 0;
  bool m_at_bound = false;

  /// Model value of ln mu at f; -infinity where x <= 0.
  double log_density(double f) const;
};

struct FitOptions {
  double max_relative_error = 1.0;  // bins with error/density above this are dropped
  int min_points = 6;
  int max_iterations = 2000;
};

/// Weighted Levenberg-Marquardt fit of the log-model to a normalized histogram.
/// Bins with zero density or relative error above the limit are excluded; the weight of
/// bin i is 1/sigma_i^2 with sigma_i = error_i / density_i. m >= 0 holds through m = u^2.
/// Throws FitError when too few bins remain, when an included bin has x <= 0,
/// or when the iteration does not converge.
FitParams fit_log_model(const FomHistogram& hist, ModelVariables vars, const FitOptions& options = {});

struct QuantumErrorBars {
  double f0 = 0.0;     // peak position
  double delta = 0.0;  // half width at relative height 1/e of the de-skewed Gaussian
  double gamma = 0.0;  // skewing factor
  double y0 = 0.0;     // ln mu at the peak (uses c)
  double x0 = 0.0;     // peak position in the model variable
};

/// x0 = (-a1 + sqrt(a1^2 + 8 a2 m)) / (4 a2), f0 = h + s x0,
/// delta = (a2 + m / (2 x0^2))^(-1/2), gamma = m delta^4 / (6 x0^3).
/// Throws std::domain_error if a1^2 + 8 a2 m < 0 or no positive peak exists.
QuantumErrorBars quantum_error_bars(const FitParams& p);
QuantumErrorBars quantum_error_bars(double a2, double a1, double m, ModelVariables vars, double c = 0.0);

/// ln poly(n) = ln 2 + (d^2 - 1)/2 ln n.
double log_poly_n(std::int64_t n, int dim);
/// 2 n^((d^2 - 1)/2); may overflow to infinity, use log_poly_n for large n.
double poly_n(std::int64_t n, int dim);

struct ConfidenceSettings {
  double epsilon = 0.05;
  std::int64_t n = 1;  // total number of measurements
  int dim = 2;
  double delta = 0.0;  // purified-distance enlargement, user supplied
  std::optional<double> w;  // spectral width of the observable (w+ - w-)
  /// Side of the region; empty picks the natural side for the figure of merit:
  /// fidelity2 -> f >= f*, distances -> f <= f*, observable -> towards its extremum.
  std::optional<TailDirection> region;
};

struct ConfidenceReport {
  double epsilon = 0.0;
  std::int64_t n = 0;
  int dim = 0;
  double log_poly_n = 0.0;
  double poly_n = 0.0;
  double log_epsilon_reduced = 0.0;
  double epsilon_reduced = 0.0;  // epsilon / poly(n); may underflow, see the log value
  TailDirection region = TailDirection::AtLeast;
  double f_star = 0.0;
  double delta_enlargement = 0.0;
  double shift = 0.0;  // f_reported - f_star
  double f_reported = 0.0;
  bool saturated = false;  // the required weight hits the edge of the available range
  std::string source;      // "model" or "histogram"
  std::string description;
};

/// Threshold from the fitted model: solves (excluded mass) = epsilon / poly(n) by
/// inverting the model's cumulative, then shifts by delta (fidelity2: -delta;
/// distances: +delta; observable: -/+ w delta for f >= / f <= regions).
ConfidenceReport confidence_threshold(const FitParams& fit, FomKind kind, const ConfidenceSettings& settings);

/// Same, inverting the raw histogram's cumulative (see tail_weight).
ConfidenceReport confidence_threshold(const FomHistogram& hist, FomKind kind, ModelVariables vars,
                                      const ConfidenceSettings& settings);

struct BootstrapResult {
  std::vector<double> values;  // figure of merit of each resampled MLE
  int failures = 0;            // resamples whose MLE did not converge (excluded from values)
};

/// Parametric bootstrap: resample `reps` datasets from rho_mle with the design of `data`,
/// recompute each MLE and evaluate the figure of merit. Rep i uses seed derive_seed(seed, i).
BootstrapResult bootstrap_compare(const TomographyDataset& data, const DensityMatrix& rho_mle, int reps,
                                  const FigureOfMerit& fom, std::uint64_t seed,
                                  const MleOptions& mle_options = {}, int num_threads = 0);

}  // namespace qeb
