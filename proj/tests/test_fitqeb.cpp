#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "qeb/fitqeb.hpp"

using namespace qeb;

namespace {

// histogram sampled exactly from exp(-a2 x^2 - a1 x + m ln x + c), constant relative error
FomHistogram synthetic(double a2, double a1, double m, double c, ModelVariables vars, HistogramSpec spec,
                       double rel_error = 0.05) {
  FomHistogram h;
  h.spec = spec;
  for (int i = 0; i < spec.num_bins; ++i) {
    const double x = vars.x_of(spec.bin_center(i));
    const double mu = x > 0.0 ? std::exp(-a2 * x * x - a1 * x + m * std::log(x) + c) : 0.0;
    h.density.push_back(mu);
    h.error.push_back(rel_error * mu);
  }
  return h;
}

void check_rel(double got, double want, double tol) { CHECK(std::abs(got - want) <= tol * std::abs(want)); }

}  // namespace

TEST_CASE("peak, width and skew of the model") {
  const auto a = quantum_error_bars(722.8, 319.6, 14.09, {0.0, +1});
  CHECK(std::abs(a.f0 - 0.0377) <= 0.0001);
  CHECK(std::abs(a.delta - 0.013) <= 0.001);
  CHECK(std::abs(a.gamma - 0.0014) <= 0.0001);

  const auto b = quantum_error_bars(8511, -476.8, 42.53, {1.0, -1});
  CHECK(std::abs(b.f0 - 0.934) <= 0.001);
  CHECK(std::abs(b.delta - 0.0086) <= 0.0001);
  CHECK(std::abs(b.gamma - 1.4e-4) <= 0.1e-4);

  const auto g = quantum_error_bars(100.0, -20.0, 0.0, {0.0, +1});
  CHECK(g.x0 == doctest::Approx(0.1));
  CHECK(g.delta == doctest::Approx(0.1));
  CHECK(g.gamma == 0.0);
}

TEST_CASE("the peak is a stationary point of the model") {
  const double a2 = 722.8, a1 = 319.6, m = 14.09;
  const auto q = quantum_error_bars(a2, a1, m, {0.0, +1});
  const double dy = -2.0 * a2 * q.x0 - a1 + m / q.x0;
  CHECK(std::abs(dy) < 1e-9);
  const double curvature = 2.0 * a2 + m / (q.x0 * q.x0);
  CHECK(q.delta == doctest::Approx(std::sqrt(2.0 / curvature)));
}

TEST_CASE("no peak") {
  CHECK_THROWS_AS(quantum_error_bars(-10.0, 1.0, 1.0, {0.0, +1}), std::domain_error);
  CHECK_THROWS_AS(quantum_error_bars(10.0, 5.0, 0.0, {0.0, +1}), std::domain_error);
}

TEST_CASE("poly(n)") {
  for (int d : {1, 2, 4}) CHECK(poly_n(1, d) == doctest::Approx(2.0));
  for (std::int64_t n = 1; n <= 100; ++n) {
    const double direct = 2.0 * std::pow(static_cast<double>(n), 1.5);
    CHECK(std::abs(poly_n(n, 2) - direct) <= 1e-12 * direct);
  }
  const double reduced = std::exp(std::log(0.05) - log_poly_n(55677, 4));
  CHECK(reduced > 1e-38);
  CHECK(reduced < 1e-37);
  CHECK_THROWS_AS(log_poly_n(0, 2), std::invalid_argument);
}

TEST_CASE("noiseless round trip") {
  const ModelVariables vars{0.0, +1};
  const auto h = synthetic(722.8, 319.6, 14.09, 63.0, vars, {0.0, 0.12, 120});
  const auto p = fit_log_model(h, vars);
  check_rel(p.a2, 722.8, 1e-6);
  check_rel(p.a1, 319.6, 1e-6);
  check_rel(p.m, 14.09, 1e-6);
  check_rel(p.c, 63.0, 1e-6);
  CHECK(p.reduced_chi2 < 1e-12);
  CHECK_FALSE(p.m_at_bound);
  for (int i = 0; i < h.spec.num_bins; ++i) {
    const double mu = h.density[static_cast<std::size_t>(i)];
    if (mu <= 0.0) continue;
    const double sigma = h.error[static_cast<std::size_t>(i)] / mu;
    CHECK(std::abs(p.log_density(h.spec.bin_center(i)) - std::log(mu)) / sigma < 1e-6);
  }
}

TEST_CASE("round trip with fidelity variables") {
  const ModelVariables vars{1.0, -1};
  const auto h = synthetic(8511, -476.8, 42.53, 80.0, vars, {0.85, 1.0, 100});
  const auto p = fit_log_model(h, vars);
  check_rel(p.a2, 8511, 1e-6);
  check_rel(p.a1, -476.8, 1e-6);
  check_rel(p.m, 42.53, 1e-6);
}

TEST_CASE("Gaussian data drives m to zero") {
  const ModelVariables vars{0.0, +1};
  const auto h = synthetic(100.0, -20.0, 0.0, 2.0, vars, {0.0, 0.3, 60});
  const auto p = fit_log_model(h, vars);
  CHECK(p.m < 1e-6);
  CHECK(p.a2 == doctest::Approx(100.0).epsilon(1e-4));
  const auto q = quantum_error_bars(p);
  CHECK(q.f0 == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("noisy data: bounds cover the truth and chi-square is sensible") {
  const ModelVariables vars{0.0, +1};
  auto h = synthetic(722.8, 319.6, 14.09, 63.0, vars, {0.005, 0.1, 100}, 0.03);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise;
  for (std::size_t i = 0; i < h.density.size(); ++i) h.density[i] *= 1.0 + 0.03 * noise(gen);
  const auto p = fit_log_model(h, vars);
  CHECK(p.reduced_chi2 > 0.5);
  CHECK(p.reduced_chi2 < 2.0);
  CHECK(p.dof == p.points_used - 4);
  CHECK(p.bounds95[2][0] < p.m);
  CHECK(p.bounds95[2][1] > p.m);
  CHECK(p.bounds95[2][0] < 14.09 + 5.0);
}

TEST_CASE("bins are excluded by density, error and relative error") {
  const ModelVariables vars{0.0, +1};
  auto h = synthetic(722.8, 319.6, 14.09, 63.0, vars, {0.0, 0.12, 120});
  const auto all = fit_log_model(h, vars);
  h.error[40] = 0.0;
  h.error[41] = 2.0 * h.density[41];
  h.density[42] = 0.0;
  const auto some = fit_log_model(h, vars);
  CHECK(some.points_used == all.points_used - 3);
}

TEST_CASE("fit errors") {
  const ModelVariables vars{0.0, +1};
  FomHistogram tiny;
  tiny.spec = {0.0, 1.0, 3};
  tiny.density = {1.0, 2.0, 1.0};
  tiny.error = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(fit_log_model(tiny, vars), FitError);

  // negative x on an included bin: wrong (h, s) for the data
  const auto h = synthetic(722.8, 319.6, 14.09, 63.0, vars, {0.0, 0.12, 120});
  CHECK_THROWS_AS(fit_log_model(h, ModelVariables{0.05, +1}), FitError);
}
