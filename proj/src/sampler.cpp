#include "qeb/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qeb {

namespace {

constexpr std::int64_t kFullRecomputeInterval = 10000;

void normalize(std::span<double> v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
}

DensityMatrix rho_from_coords(int dim, std::span<const double> coords) {
  const int dd = dim * dim;
  CMatrix t(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) t(i, j) = Complex(coords[i + j * dim], coords[dd + i + j * dim]);
  return DensityMatrix::from_trusted(t * t.adjoint());
}

// Mutable chain state with preallocated buffers. Per step the RNG is consumed as
// 2 d^2 normals for the jump, then one uniform for the acceptance test.
class Chain {
 public:
  Chain(const LikelihoodEvaluator& likelihood, const StatePoint& start, Rng& rng)
      : likelihood_(likelihood),
        rng_(rng),
        cur_(start.coords().begin(), start.coords().end()),
        cand_(cur_.size()),
        scratch_(static_cast<std::size_t>(start.dim() * start.dim())) {
    lambda_ = likelihood_.from_coords(cur_, scratch_);
  }

  bool step(double eta) {
    for (std::size_t i = 0; i < cur_.size(); ++i) cand_[i] = cur_[i] + eta * normal_(rng_);
    normalize(cand_);
    const double cand_lambda = likelihood_.from_coords(cand_, scratch_);
    const double u = uniform_(rng_);
    const bool accept = accept_move(cand_lambda, u);
    if (accept) {
      cur_.swap(cand_);
      lambda_ = cand_lambda;
    }
    if (++since_refresh_ == kFullRecomputeInterval) {
      since_refresh_ = 0;
      lambda_ = likelihood_.from_coords(cur_, scratch_);
    }
    return accept;
  }

  bool accept_move(double cand_lambda, double u) const {
    if (cand_lambda == kInfiniteLogLikelihood) return false;
    if (lambda_ == kInfiniteLogLikelihood) return true;
    return u < std::exp(-0.5 * (cand_lambda - lambda_));
  }

  std::span<const double> coords() const { return cur_; }
  double lambda() const { return lambda_; }

 private:
  const LikelihoodEvaluator& likelihood_;
  Rng& rng_;
  std::vector<double> cur_, cand_, scratch_;
  double lambda_ = 0.0;
  std::int64_t since_refresh_ = 0;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

double tune_step_size(Chain& chain, const WalkConfig& config, double step) {
  for (int round = 0; round < config.tune_rounds; ++round) {
    std::int64_t accepted = 0;
    for (std::int64_t s = 0; s < config.tune_round_steps; ++s) accepted += chain.step(step);
    const double ratio = static_cast<double>(accepted) / static_cast<double>(config.tune_round_steps);
    step *= std::clamp(ratio / config.target_acceptance, 0.5, 2.0);
    step = std::clamp(step, 1e-6, 1.0);
  }
  return step;
}

}  // namespace

// --- config ---

void WalkConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("WalkConfig: step size must be positive");
  if (n_therm < 0) throw std::invalid_argument("WalkConfig: n_therm must be non-negative");
  if (n_sweep < 0) throw std::invalid_argument("WalkConfig: n_sweep must be positive (or 0 for the default)");
  if (n_samples < 1) throw std::invalid_argument("WalkConfig: n_samples must be positive");
  if (n_walkers < 1) throw std::invalid_argument("WalkConfig: n_walkers must be positive");
  if (auto_tune && (tune_rounds < 1 || tune_round_steps < 1 || !(target_acceptance > 0.0 && target_acceptance < 1.0)))
    throw std::invalid_argument("WalkConfig: invalid step-size tuner settings");
}

std::int64_t WalkConfig::sweep_for(double step) const {
  if (n_sweep > 0) return n_sweep;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(1.0 / step)));
}

std::uint64_t walker_seed(std::uint64_t base_seed, int walker_index) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(walker_index));
}

std::vector<double> WalkerReport::bin_series(int bin) const {
  std::vector<double> s(bin_sequence.size());
  for (std::size_t i = 0; i < bin_sequence.size(); ++i) s[i] = bin_sequence[i] == bin ? 1.0 : 0.0;
  return s;
}

// --- single steps ---

StatePoint propose_jump(const StatePoint& p, double step_size, Rng& rng) {
  if (step_size == 0.0) return p;
  std::normal_distribution<double> normal;
  std::vector<double> y(p.coords().begin(), p.coords().end());
  for (double& v : y) v += step_size * normal(rng);
  normalize(y);
  return StatePoint(p.dim(), std::move(y));
}

StepResult mh_step(const StatePoint& p, double lambda_p, const LikelihoodEvaluator& likelihood,
                   double step_size, Rng& rng) {
  StatePoint cand = propose_jump(p, step_size, rng);
  const double cand_lambda = likelihood.from_coords(cand.coords());
  const double u = std::uniform_real_distribution<double>()(rng);
  bool accept = false;
  if (cand_lambda != kInfiniteLogLikelihood)
    accept = lambda_p == kInfiniteLogLikelihood || u < std::exp(-0.5 * (cand_lambda - lambda_p));
  if (accept) return {std::move(cand), cand_lambda, true};
  return {p, lambda_p, false};
}

StepResult mh_step(const StatePoint& p, double lambda_p, const TomographyDataset& data,
                   double step_size, Rng& rng) {
  return mh_step(p, lambda_p, LikelihoodEvaluator(data), step_size, rng);
}

// --- walkers ---

WalkerResult run_walker(const TomographyDataset& data, const WalkConfig& config, int walker_index,
                        const FigureOfMerit& fom, const HistogramSpec& spec) {
  config.validate();
  spec.validate();
  if (fom.dim() != data.dim())
    throw std::invalid_argument("run_walker: figure of merit and data have different dimensions");

  WalkerReport report;
  report.walker_index = walker_index;
  report.seed = walker_seed(config.base_seed, walker_index);
  Rng rng(report.seed);

  const LikelihoodEvaluator likelihood(data);
  Chain chain(likelihood, random_point(data.dim(), rng), rng);

  double step = config.step_size;
  if (config.auto_tune) step = tune_step_size(chain, config, step);
  const std::int64_t sweep = config.sweep_for(step);
  report.step_size = step;
  report.sweep = sweep;

  for (std::int64_t s = 0; s < config.n_therm * sweep; ++s) chain.step(step);

  HistogramAccumulator acc(spec);
  report.bin_sequence.reserve(static_cast<std::size_t>(config.n_samples));
  if (config.keep_samples) report.samples.reserve(static_cast<std::size_t>(config.n_samples));
  std::int64_t accepted = 0;
  for (std::int64_t k = 0; k < config.n_samples; ++k) {
    for (std::int64_t s = 0; s < sweep; ++s) accepted += chain.step(step);
    const double f = fom.evaluate(rho_from_coords(data.dim(), chain.coords()));
    acc.record(f);
    report.bin_sequence.push_back(spec.bin_index(f).value_or(-1));
    if (config.keep_samples) report.samples.push_back(f);
  }
  report.recorded = config.n_samples;
  report.steps = config.n_samples * sweep;
  report.acceptance_ratio = static_cast<double>(accepted) / static_cast<double>(report.steps);
  if (report.acceptance_ratio < 0.2 || report.acceptance_ratio > 0.5) {
    std::ostringstream os;
    os << "walker " << walker_index << ": acceptance ratio " << report.acceptance_ratio
       << " is outside [0.2, 0.5]; consider adjusting the step size";
    report.warnings.push_back(os.str());
  }

  std::vector<double> mean_errors(static_cast<std::size_t>(spec.num_bins));
  for (int b = 0; b < spec.num_bins; ++b) {
    const auto series = report.bin_series(b);
    auto r = binning_analysis(series);
    mean_errors[static_cast<std::size_t>(b)] = r.error;
    if (!r.warning.empty() && r.fallback)
      report.warnings.push_back("walker " + std::to_string(walker_index) + ": " + r.warning);
  }
  WalkerResult out{acc.normalized(mean_errors), std::move(report)};
  return out;
}

int default_thread_count() {
  if (const char* env = std::getenv("QEB_NUM_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

AnalysisResult run_analysis(const TomographyDataset& data, const WalkConfig& config,
                            const FigureOfMerit& fom, const HistogramSpec& spec, int num_threads) {
  config.validate();
  spec.validate();
  const int n = config.n_walkers;
  std::vector<std::optional<WalkerResult>> slots(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

  auto work = [&](int i) {
    try {
      slots[static_cast<std::size_t>(i)] = run_walker(data, config, i, fom, spec);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  const int threads = std::min(n, num_threads > 0 ? num_threads : default_thread_count());
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  AnalysisResult result;
  std::vector<FomHistogram> hists;
  for (auto& s : slots) {
    hists.push_back(s->histogram);
    result.walkers.push_back(std::move(*s));
  }
  result.combined = combine(hists);
  return result;
}

HistogramSpec auto_range(const TomographyDataset& data, const WalkConfig& config,
                         const FigureOfMerit& fom, int num_bins, std::int64_t pilot_samples) {
  WalkConfig pilot = config;
  pilot.n_samples = pilot_samples;
  pilot.keep_samples = true;
  pilot.n_walkers = 1;
  // wide provisional range; only the raw samples are used
  const auto [lo, hi] = fom.natural_range();
  const double pad = std::max(1.0, hi - lo);
  HistogramSpec wide{lo - pad, hi + pad, 2};
  // pilot stream is disjoint from the walker streams 0..n_walkers-1
  const auto r = run_walker(data, pilot, -1, fom, wide);
  const auto& xs = r.report.samples;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(xs.size() - 1));

  HistogramSpec spec;
  spec.num_bins = num_bins;
  spec.f_min = std::max(lo, mean - 8.0 * sd);
  spec.f_max = std::min(hi + 1e-9 * std::max(1.0, std::abs(hi)), mean + 8.0 * sd);
  if (!(spec.f_min < spec.f_max)) {
    spec.f_min = lo;
    spec.f_max = hi + 1e-9 * std::max(1.0, std::abs(hi));
  }
  spec.validate();
  return spec;
}

}  // namespace qeb
