#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

#include "qeb/sampler.hpp"

using namespace qeb;

namespace {

CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

TomographyDataset flat_data(int d) { return TomographyDataset(d, {PovmEffect(CMatrix::Identity(d, d))}, {1}); }

TomographyDataset z_data() {
  return TomographyDataset(2, {PovmEffect(diag2(1, 0)), PovmEffect(diag2(0, 1))}, {30, 10});
}

double norm_of(const StatePoint& p) {
  double s = 0.0;
  for (double x : p.coords()) s += x * x;
  return std::sqrt(s);
}

WalkConfig small_config(std::int64_t samples) {
  WalkConfig c;
  c.step_size = 0.1;
  c.n_therm = 50;
  c.n_samples = samples;
  c.base_seed = 1234;
  return c;
}

}  // namespace

TEST_CASE("proposal") {
  Rng rng(1);
  const auto p = random_point(2, rng);
  const auto same = propose_jump(p, 0.0, rng);
  CHECK(std::equal(p.coords().begin(), p.coords().end(), same.coords().begin()));
  for (double eta : {1e-3, 0.1, 1.0, 10.0}) CHECK(std::abs(norm_of(propose_jump(p, eta, rng)) - 1.0) < 1e-12);
  Rng a(5), b(5);
  const auto x = propose_jump(p, 0.05, a), y = propose_jump(p, 0.05, b);
  CHECK(std::equal(x.coords().begin(), x.coords().end(), y.coords().begin()));
}

TEST_CASE("acceptance rule") {
  const auto flat = flat_data(2);
  const LikelihoodEvaluator eval(flat);
  Rng rng(2);
  auto p = random_point(2, rng);
  for (int i = 0; i < 1000; ++i) CHECK(mh_step(p, 0.0, eval, 0.1, rng).accepted);

  // candidate lambda exceeds the current one by 2 ln 2: acceptance 1/2
  const int trials = 100000;
  int accepted = 0;
  for (int i = 0; i < trials; ++i) accepted += mh_step(p, -2.0 * std::log(2.0), eval, 0.1, rng).accepted;
  const double rate = static_cast<double>(accepted) / trials;
  CHECK(std::abs(rate - 0.5) < 3.0 * std::sqrt(0.25 / trials));

  // an observed effect that no state can produce: every candidate has infinite lambda
  const TomographyDataset impossible(2, {PovmEffect(CMatrix::Zero(2, 2)), PovmEffect(CMatrix::Identity(2, 2))},
                                     {1, 1});
  for (int i = 0; i < 100; ++i) {
    const auto r = mh_step(p, 1.0, impossible, 0.1, rng);
    CHECK_FALSE(r.accepted);
    CHECK(r.log_likelihood == 1.0);
  }
}

TEST_CASE("dataset and evaluator overloads agree") {
  const auto data = z_data();
  Rng a(3), b(3);
  Rng s(4);
  const auto p = random_point(2, s);
  const double l = log_likelihood(rho_from_point(p), data);
  const auto r1 = mh_step(p, l, data, 0.2, a);
  const auto r2 = mh_step(p, l, LikelihoodEvaluator(data), 0.2, b);
  CHECK(r1.accepted == r2.accepted);
  CHECK(r1.log_likelihood == r2.log_likelihood);
}

TEST_CASE("flat likelihood reproduces the Hilbert-Schmidt purity moment") {
  auto cfg = small_config(20000);
  cfg.keep_samples = true;
  const auto fom = FigureOfMerit::purity(2);
  const auto r = run_walker(flat_data(2), cfg, 0, fom, {0.5, 1.0 + 1e-9, 50});
  const auto& xs = r.report.samples;
  REQUIRE(xs.size() == 20000);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double se = binning_error(xs);
  CHECK(std::abs(mean - 0.8) < 3.0 * se);
  CHECK(r.histogram.off_range_count == 0);
}

TEST_CASE("recorded counts and walker bookkeeping") {
  auto cfg = small_config(500);
  cfg.n_walkers = 12;
  const auto fom = FigureOfMerit::purity(2);
  const HistogramSpec spec{0.5, 1.0 + 1e-9, 20};
  const auto res = run_analysis(flat_data(2), cfg, fom, spec, 1);
  REQUIRE(res.walkers.size() == 12);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < res.walkers.size(); ++i) {
    CHECK(res.walkers[i].report.walker_index == static_cast<int>(i));
    CHECK(res.walkers[i].report.recorded == 500);
    CHECK(res.walkers[i].report.bin_sequence.size() == 500);
    CHECK(res.walkers[i].report.seed == derive_seed(1234, i));
    total += res.walkers[i].report.recorded;
  }
  CHECK(total == 12 * 500);
  CHECK(res.combined.samples == 12 * 500);
}

TEST_CASE("a single walker equals run_walker") {
  auto cfg = small_config(1000);
  const auto fom = FigureOfMerit::purity(2);
  const HistogramSpec spec{0.5, 1.0 + 1e-9, 20};
  const auto one = run_walker(z_data(), cfg, 0, fom, spec);
  const auto all = run_analysis(z_data(), cfg, fom, spec, 1);
  CHECK(all.combined.density == one.histogram.density);
  CHECK(all.combined.error == one.histogram.error);
}

TEST_CASE("determinism across runs and thread counts") {
  auto cfg = small_config(2000);
  cfg.n_walkers = 4;
  const auto fom = FigureOfMerit::trace_distance_to(DensityMatrix(diag2(0.75, 0.25)));
  const HistogramSpec spec{0.0, 0.6, 30};
  const auto a = run_analysis(z_data(), cfg, fom, spec, 1);
  const auto b = run_analysis(z_data(), cfg, fom, spec, 3);
  const auto c = run_analysis(z_data(), cfg, fom, spec, 1);
  CHECK(a.combined.density == b.combined.density);
  CHECK(a.combined.error == b.combined.error);
  CHECK(a.combined.density == c.combined.density);
  cfg.base_seed = 99;
  const auto d = run_analysis(z_data(), cfg, fom, spec, 1);
  CHECK(a.combined.density != d.combined.density);
}

TEST_CASE("a constant-probability effect leaves the chain unchanged") {
  auto cfg = small_config(1000);
  const auto fom = FigureOfMerit::purity(2);
  const HistogramSpec spec{0.5, 1.0 + 1e-9, 20};
  const TomographyDataset extra(2,
                                {PovmEffect(diag2(1, 0)), PovmEffect(diag2(0, 1)), PovmEffect(CMatrix::Identity(2, 2))},
                                {30, 10, 7});
  const auto a = run_walker(z_data(), cfg, 0, fom, spec);
  const auto b = run_walker(extra, cfg, 0, fom, spec);
  CHECK(a.report.bin_sequence == b.report.bin_sequence);
  // a genuinely different likelihood changes the chain
  const TomographyDataset other(2, {PovmEffect(diag2(1, 0)), PovmEffect(diag2(0, 1))}, {10, 30});
  CHECK(run_walker(other, cfg, 0, fom, spec).report.bin_sequence != a.report.bin_sequence);
}

TEST_CASE("auto tuning moves the acceptance ratio towards the target") {
  auto cfg = small_config(2000);
  cfg.step_size = 2.0;
  cfg.auto_tune = true;
  const auto fom = FigureOfMerit::purity(2);
  const auto data = TomographyDataset(2, {PovmEffect(diag2(1, 0)), PovmEffect(diag2(0, 1))}, {3000, 1000});
  const auto r = run_walker(data, cfg, 0, fom, {0.5, 1.0 + 1e-9, 20});
  CHECK(r.report.step_size < 2.0);
  CHECK(r.report.acceptance_ratio > 0.2);
  CHECK(r.report.acceptance_ratio < 0.45);
}

TEST_CASE("auto range brackets the samples") {
  auto cfg = small_config(1000);
  const auto fom = FigureOfMerit::trace_distance_to(DensityMatrix(diag2(0.75, 0.25)));
  const auto spec = auto_range(z_data(), cfg, fom, 50, 1000);
  CHECK(spec.f_min >= 0.0);
  CHECK(spec.f_max <= 1.0 + 1e-6);
  CHECK(spec.num_bins == 50);
  const auto r = run_walker(z_data(), cfg, 0, fom, spec);
  CHECK(r.histogram.off_range_count < 10);
}

TEST_CASE("config validation") {
  WalkConfig c;
  c.step_size = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = WalkConfig{};
  c.n_samples = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = WalkConfig{};
  CHECK(c.sweep_for(0.01) == 100);
  CHECK(c.sweep_for(0.3) == 4);
  c.n_sweep = 7;
  CHECK(c.sweep_for(0.01) == 7);
}
