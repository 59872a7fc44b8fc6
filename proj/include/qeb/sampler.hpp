#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qeb/figures.hpp"
#include "qeb/histstats.hpp"
#include "qeb/likelihood.hpp"
#include "qeb/statespace.hpp"
#include "qeb/tomodata.hpp"

namespace qeb {

struct WalkConfig {
  double step_size = 0.01;
  std::int64_t n_therm = 500;  // sweeps discarded before recording
  std::int64_t n_sweep = 0;    // steps per recorded sample; 0 means ceil(1 / step_size)
  std::int64_t n_samples = 32768;
  int n_walkers = 1;
  std::uint64_t base_seed = 0;

  /// Adjusts the step size towards `target_acceptance` before thermalization.
  bool auto_tune = false;
  double target_acceptance = 0.3;
  int tune_rounds = 30;
  std::int64_t tune_round_steps = 1000;

  bool keep_samples = false;  // keep raw f values in the report

  void validate() const;
  std::int64_t sweep_for(double step) const;
};

/// Seed of walker `index` under base seed `base`: derive_seed(base, index).
std::uint64_t walker_seed(std::uint64_t base_seed, int walker_index);

struct WalkerReport {
  int walker_index = 0;
  std::uint64_t seed = 0;
  double step_size = 0.0;
  std::int64_t sweep = 0;
  std::int64_t recorded = 0;
  std::int64_t steps = 0;           // steps after thermalization
  double acceptance_ratio = 0.0;    // over the steps after thermalization
  std::vector<std::int32_t> bin_sequence;  // bin of each recorded sample, -1 when off-range
  std::vector<double> samples;             // only with WalkConfig::keep_samples
  std::vector<std::string> warnings;

  /// 0/1 indicator series of one histogram bin.
  std::vector<double> bin_series(int bin) const;
};

struct WalkerResult {
  FomHistogram histogram;
  WalkerReport report;
};

struct AnalysisResult {
  FomHistogram combined;
  std::vector<WalkerResult> walkers;
};

/// y' = (y + eta * omega) / |y + eta * omega| with omega standard normal in 2 d^2 dimensions.
StatePoint propose_jump(const StatePoint& p, double step_size, Rng& rng);

struct StepResult {
  StatePoint point;
  double log_likelihood;
  bool accepted;
};

/// One Metropolis-Hastings step; accepts with probability min(1, exp(-(lambda' - lambda)/2)).
/// Candidates with infinite lambda are always rejected.
StepResult mh_step(const StatePoint& p, double lambda_p, const LikelihoodEvaluator& likelihood,
                   double step_size, Rng& rng);
StepResult mh_step(const StatePoint& p, double lambda_p, const TomographyDataset& data,
                   double step_size, Rng& rng);

WalkerResult run_walker(const TomographyDataset& data, const WalkConfig& config, int walker_index,
                        const FigureOfMerit& fom, const HistogramSpec& spec);

/// Runs config.n_walkers independent walkers (in parallel when num_threads != 1) and
/// combines their histograms in walker-index order. num_threads = 0 uses default_thread_count().
AnalysisResult run_analysis(const TomographyDataset& data, const WalkConfig& config,
                            const FigureOfMerit& fom, const HistogramSpec& spec, int num_threads = 0);

/// QEB_NUM_THREADS if set, otherwise the hardware concurrency.
int default_thread_count();

/// Histogram range from a short pilot walk: mean +- 8 standard deviations, clipped
/// to the figure's natural range (the upper end nudged up so the maximum stays in range).
HistogramSpec auto_range(const TomographyDataset& data, const WalkConfig& config,
                         const FigureOfMerit& fom, int num_bins, std::int64_t pilot_samples = 2048);

}  // namespace qeb
