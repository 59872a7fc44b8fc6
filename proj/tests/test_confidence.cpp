#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qeb/fitqeb.hpp"

using namespace qeb;

namespace {

FitParams params(double a2, double a1, double m, ModelVariables vars) {
  FitParams p;
  p.a2 = a2;
  p.a1 = a1;
  p.m = m;
  p.vars = vars;
  return p;
}

FitParams superconducting() { return params(8511, -476.8, 42.53, {1.0, -1}); }

ConfidenceSettings settings(double epsilon, double delta, std::int64_t n, int dim) {
  ConfidenceSettings s;
  s.epsilon = epsilon;
  s.delta = delta;
  s.n = n;
  s.dim = dim;
  return s;
}

// fraction of the model mass at x >= x_star by a plain trapezoid rule
double upper_fraction(const FitParams& p, double x_star) {
  const int n = 400000;
  const double hi = 1.0;
  const double h = hi / n;
  double total = 0.0, upper = 0.0;
  for (int i = 1; i < n; ++i) {
    const double x = i * h;
    const double v = std::exp(-p.a2 * x * x - p.a1 * x + p.m * std::log(x) - 100.0);
    total += v * h;
    if (x >= x_star) upper += v * h;
  }
  return upper / total;
}

}  // namespace

TEST_CASE("threshold for the superconducting-qubit model") {
  const auto r = confidence_threshold(superconducting(), FomKind::Fidelity2ToPure, settings(0.05, 0.1, 55677, 4));
  CHECK(std::abs(r.f_star - 0.85) <= 0.02);
  CHECK(std::abs(r.f_reported - 0.75) <= 0.02);
  CHECK(r.region == TailDirection::AtLeast);
  CHECK(r.epsilon_reduced > 1e-38);
  CHECK(r.epsilon_reduced < 1e-37);
  CHECK(r.description.rfind("fidelity2 in [0.7", 0) == 0);
  CHECK(r.description.find(", 1]") != std::string::npos);
  CHECK(r.source == "model");
}

TEST_CASE("model inversion agrees with direct integration") {
  const auto p = superconducting();
  for (double eps : {0.2, 0.05, 0.01}) {
    // n = 1, d = 1: poly = 2
    const auto r = confidence_threshold(p, FomKind::Fidelity2ToPure, settings(eps, 0.0, 1, 1));
    const double x_star = 1.0 - r.f_star;
    CHECK(upper_fraction(p, x_star) == doctest::Approx(eps / 2.0).epsilon(2e-3));
  }
}

TEST_CASE("zero enlargement and monotonicity") {
  const auto p = superconducting();
  const auto r0 = confidence_threshold(p, FomKind::Fidelity2ToPure, settings(0.05, 0.0, 55677, 4));
  CHECK(r0.f_reported == r0.f_star);
  double prev = -1.0;
  for (double eps : {1e-3, 1e-2, 0.05, 0.2, 0.5}) {
    const auto r = confidence_threshold(p, FomKind::Fidelity2ToPure, settings(eps, 0.0, 100, 2));
    CHECK(r.f_star > prev);
    prev = r.f_star;
  }
}

TEST_CASE("distance regions extend towards zero") {
  const auto p = params(722.8, 319.6, 14.09, {0.0, +1});
  const auto r = confidence_threshold(p, FomKind::TraceDistance, settings(0.05, 0.01, 4500, 4));
  CHECK(r.region == TailDirection::AtMost);
  CHECK(r.f_star > quantum_error_bars(p).f0);
  CHECK(r.f_reported == doctest::Approx(r.f_star + 0.01));
  CHECK(r.description.rfind("trace-dist in [0, ", 0) == 0);
}

TEST_CASE("observables shift by w delta and need w") {
  const auto p = params(8511, -476.8, 42.53, {2.0, -1});
  auto s = settings(0.05, 0.1, 4500, 4);
  CHECK_THROWS_AS(confidence_threshold(p, FomKind::Observable, s), std::invalid_argument);
  s.w = 6.0;
  const auto r = confidence_threshold(p, FomKind::Observable, s);
  CHECK(r.region == TailDirection::AtLeast);
  CHECK(r.f_reported == doctest::Approx(r.f_star - 0.6));
  CHECK(r.description.find(">=") != std::string::npos);
}

TEST_CASE("histogram inversion matches the model") {
  const auto p = superconducting();
  FomHistogram h;
  h.spec = {0.8, 1.0, 400};
  for (int i = 0; i < h.spec.num_bins; ++i) {
    h.density.push_back(std::exp(p.log_density(h.spec.bin_center(i)) + 100.0));
    h.error.push_back(0.0);
  }
  const auto s = settings(0.05, 0.0, 1, 1);
  const auto model = confidence_threshold(p, FomKind::Fidelity2ToPure, s);
  const auto hist = confidence_threshold(h, FomKind::Fidelity2ToPure, {1.0, -1}, s);
  CHECK(std::abs(model.f_star - hist.f_star) < h.spec.bin_width());
  CHECK_FALSE(hist.saturated);
  CHECK(hist.source == "histogram");

  // a range that cuts into the bulk cannot resolve a tiny tail
  FomHistogram cut;
  cut.spec = {0.9, 1.0, 100};
  for (int i = 0; i < cut.spec.num_bins; ++i) {
    cut.density.push_back(std::exp(p.log_density(cut.spec.bin_center(i)) + 100.0));
    cut.error.push_back(0.0);
  }
  const auto tiny = confidence_threshold(cut, FomKind::Fidelity2ToPure, {1.0, -1}, settings(0.05, 0.0, 55677, 4));
  CHECK(tiny.saturated);
}

TEST_CASE("invalid settings") {
  CHECK_THROWS_AS(confidence_threshold(superconducting(), FomKind::Fidelity2ToPure, settings(0.0, 0.1, 10, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(confidence_threshold(superconducting(), FomKind::Fidelity2ToPure, settings(0.1, -0.1, 10, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(confidence_threshold(superconducting(), FomKind::Purity, settings(0.1, 0.1, 10, 2)),
                  std::invalid_argument);
  // a convex log-model has no finite mass
  CHECK_THROWS_AS(confidence_threshold(params(-1998.1, 1439.6, 54.5, {1.0, -1}), FomKind::Fidelity2ToPure,
                                       settings(0.05, 0.0, 4500, 4)),
                  std::domain_error);
}
