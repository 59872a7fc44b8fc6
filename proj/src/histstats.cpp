#include "qeb/histstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qeb {

void HistogramSpec::validate() const {
  if (!(f_min < f_max)) {
    std::ostringstream os;
    os << "HistogramSpec: need f_min < f_max, got [" << f_min << ", " << f_max << ")";
    throw std::invalid_argument(os.str());
  }
  if (num_bins < 2) throw std::invalid_argument("HistogramSpec: need at least 2 bins");
}

std::optional<int> HistogramSpec::bin_index(double value) const {
  if (!(value >= f_min) || !(value < f_max)) return std::nullopt;
  auto i = static_cast<int>((value - f_min) / bin_width());
  // guard against rounding at the upper edge
  return std::min(i, num_bins - 1);
}

double FomHistogram::total_mass() const {
  return std::accumulate(density.begin(), density.end(), 0.0) * spec.bin_width();
}

// --- accumulator ---

HistogramAccumulator::HistogramAccumulator(HistogramSpec spec)
    : spec_(spec), counts_(static_cast<std::size_t>(spec.num_bins), 0) {
  spec_.validate();
}

void HistogramAccumulator::record(double value) {
  ++total_;
  if (auto i = spec_.bin_index(value))
    ++counts_[static_cast<std::size_t>(*i)];
  else
    ++off_range_;
}

FomHistogram HistogramAccumulator::normalized(std::span<const double> mean_errors) const {
  if (!mean_errors.empty() && mean_errors.size() != counts_.size())
    throw std::invalid_argument("HistogramAccumulator::normalized: error vector has wrong size");
  FomHistogram h;
  h.spec = spec_;
  h.off_range_count = off_range_;
  h.samples = total_;
  h.density.assign(counts_.size(), 0.0);
  h.error.assign(counts_.size(), 0.0);
  const std::int64_t inside = in_range();
  if (inside == 0) return h;
  const auto n = static_cast<double>(total_);
  // series mean (count/total) -> density
  const double scale = n / (static_cast<double>(inside) * spec_.bin_width());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const double p = static_cast<double>(counts_[i]) / n;
    h.density[i] = p * scale;
    const double err = mean_errors.empty() ? std::sqrt(p * (1.0 - p) / n) : mean_errors[i];
    h.error[i] = err * scale;
  }
  return h;
}

// --- binning analysis ---

BinningResult binning_analysis(std::span<const double> series) {
  BinningResult r;
  const std::size_t n = series.size();
  if (n < 2) {
    r.fallback = true;
    r.warning = "series too short for any error estimate";
    return r;
  }

  auto naive = [](std::span<const double> s) {
    const auto m = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / m;
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= (m - 1.0);
    return std::sqrt(var / m);
  };

  if (n < 16) {
    r.naive_error = r.error = naive(series);
    r.fallback = true;
    r.warning = "series shorter than 16 samples; using the naive iid error";
    return r;
  }

  const int max_level = static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 4;
  const std::size_t block = std::size_t{1} << max_level;
  const std::size_t used = (n / block) * block;

  std::vector<double> level(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(used));
  for (int l = 0; l <= max_level; ++l) {
    r.level_errors.push_back(naive(level));
    std::vector<double> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level = std::move(next);
  }
  r.naive_error = r.level_errors.front();

  const auto& e = r.level_errors;
  for (std::size_t l = 0; l + 2 < e.size(); ++l) {
    const double hi = std::max({e[l], e[l + 1], e[l + 2]});
    const double lo = std::min({e[l], e[l + 1], e[l + 2]});
    if (hi == 0.0 || (hi - lo) <= 0.05 * hi) {
      r.converged = true;
      r.error = hi;
      break;
    }
  }
  if (!r.converged) {
    r.error = *std::max_element(e.begin(), e.end());
    r.warning = "binning analysis did not reach a plateau; reporting the largest level error";
  }
  r.error = std::max(r.error, r.naive_error);
  return r;
}

double binning_error(std::span<const double> series) { return binning_analysis(series).error; }

// --- combination ---

namespace {

void require_same_spec(std::span<const FomHistogram> hs) {
  if (hs.empty()) throw std::invalid_argument("combine: no histograms");
  for (const auto& h : hs)
    if (!(h.spec == hs.front().spec))
      throw std::invalid_argument("combine: histogram specs differ");
}

}  // namespace

FomHistogram combine(std::span<const FomHistogram> histograms) {
  require_same_spec(histograms);
  const auto k = static_cast<double>(histograms.size());
  FomHistogram out;
  out.spec = histograms.front().spec;
  const auto bins = static_cast<std::size_t>(out.spec.num_bins);
  out.density.assign(bins, 0.0);
  out.error.assign(bins, 0.0);
  for (const auto& h : histograms) {
    for (std::size_t i = 0; i < bins; ++i) {
      out.density[i] += h.density[i];
      out.error[i] += h.error[i] * h.error[i];
    }
    out.off_range_count += h.off_range_count;
    out.samples += h.samples;
  }
  for (std::size_t i = 0; i < bins; ++i) {
    out.density[i] /= k;
    out.error[i] = std::sqrt(out.error[i]) / k;
  }
  return out;
}

FomHistogram combine_by_spread(std::span<const FomHistogram> histograms) {
  require_same_spec(histograms);
  if (histograms.size() < 2) throw std::invalid_argument("combine_by_spread: need at least 2 histograms");
  FomHistogram out = combine(histograms);
  const auto k = static_cast<double>(histograms.size());
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    double var = 0.0;
    for (const auto& h : histograms) var += (h.density[i] - out.density[i]) * (h.density[i] - out.density[i]);
    var /= (k - 1.0);
    out.error[i] = std::sqrt(var / k);
  }
  return out;
}

// --- tail weight ---

double tail_weight(const FomHistogram& h, double f, TailDirection direction) {
  const HistogramSpec& s = h.spec;
  const int n = s.num_bins;
  const double w = s.bin_width();
  f = std::clamp(f, s.f_min, s.f_max);

  // nodes: f_min, centers, f_max; flat over the outer half bins
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(n) + 2);
  ys.reserve(static_cast<std::size_t>(n) + 2);
  xs.push_back(s.f_min);
  ys.push_back(h.density.front());
  for (int i = 0; i < n; ++i) {
    xs.push_back(s.bin_center(i));
    ys.push_back(h.density[static_cast<std::size_t>(i)]);
  }
  xs.push_back(s.f_max);
  ys.push_back(h.density.back());

  double below = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
    const double x0 = xs[j], x1 = xs[j + 1];
    if (f <= x0) break;
    const double xe = std::min(f, x1);
    const double slope = (x1 > x0) ? (ys[j + 1] - ys[j]) / (x1 - x0) : 0.0;
    const double ye = ys[j] + slope * (xe - x0);
    below += 0.5 * (ys[j] + ye) * (xe - x0);
  }
  const double total = std::accumulate(h.density.begin(), h.density.end(), 0.0) * w;
  return direction == TailDirection::AtMost ? below : std::max(0.0, total - below);
}

}  // namespace qeb
