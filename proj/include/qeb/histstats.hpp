#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qeb {

/// Bins are left-closed, right-open; f_max itself is off-range.
struct HistogramSpec {
  double f_min = 0.0;
  double f_max = 1.0;
  int num_bins = 100;

  /// Throws std::invalid_argument unless f_min < f_max and num_bins >= 2.
  void validate() const;
  double bin_width() const { return (f_max - f_min) / num_bins; }
  double bin_lower(int i) const { return f_min + i * bin_width(); }
  double bin_center(int i) const { return f_min + (i + 0.5) * bin_width(); }
  std::optional<int> bin_index(double value) const;

  bool operator==(const HistogramSpec&) const = default;
};

/// Density estimate of mu(f) with one-sigma errors per bin.
struct FomHistogram {
  HistogramSpec spec;
  std::vector<double> density;
  std::vector<double> error;
  std::int64_t off_range_count = 0;
  std::int64_t samples = 0;  // recorded samples, in range or not

  /// Sum density * bin_width.
  double total_mass() const;
};

class HistogramAccumulator {
 public:
  explicit HistogramAccumulator(HistogramSpec spec);

  void record(double value);

  const HistogramSpec& spec() const { return spec_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t off_range_count() const { return off_range_; }
  std::int64_t total() const { return total_; }
  std::int64_t in_range() const { return total_ - off_range_; }

  /// Density normalized over the in-range samples; `mean_errors` are standard errors of the
  /// per-bin 0/1 series means (empty = naive binomial errors) and are scaled alongside.
  FomHistogram normalized(std::span<const double> mean_errors = {}) const;

 private:
  HistogramSpec spec_;
  std::vector<std::int64_t> counts_;
  std::int64_t off_range_ = 0;
  std::int64_t total_ = 0;
};

struct BinningResult {
  double error = 0.0;        // reported standard error of the mean
  double naive_error = 0.0;  // iid estimate (level 0)
  std::vector<double> level_errors;
  bool converged = false;  // a plateau was found
  bool fallback = false;   // series too short for a binning analysis
  std::string warning;
};

/// Binning analysis of a time series. Uses levels 0..L with L = floor(log2 N) - 4
/// (the series is truncated to a multiple of 2^L); the plateau is the first run of three
/// consecutive levels agreeing within 5%, and its largest value is reported. Without a
/// plateau the largest level error is reported. Never below the naive iid error.
/// Series shorter than 16 fall back to the naive error with a warning.
BinningResult binning_analysis(std::span<const double> series);
double binning_error(std::span<const double> series);

/// Per-bin mean of densities; per-bin error sqrt(sum err_i^2) / K. Specs must match.
FomHistogram combine(std::span<const FomHistogram> histograms);

/// Consistency check: per-bin mean with error = sample standard deviation / sqrt(K)
/// across independent histograms. Needs K >= 2.
FomHistogram combine_by_spread(std::span<const FomHistogram> histograms);

enum class TailDirection { AtLeast, AtMost };

/// Mass of the density on the requested side of f, integrating the piecewise-linear
/// interpolation through bin centers (flat over the outer half bins). f is clamped to the range.
double tail_weight(const FomHistogram& h, double f, TailDirection direction);

}  // namespace qeb
