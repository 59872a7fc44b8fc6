#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <limits>

#include "qeb/figures.hpp"
#include "qeb/likelihood.hpp"
#include "qeb/mle.hpp"

using namespace qeb;

namespace {

TomographyDataset counts_on_pauli_bases(std::array<std::array<std::int64_t, 2>, 3> counts) {
  const auto settings = standard_pauli_settings(1);
  std::vector<PovmEffect> effects;
  std::vector<std::int64_t> n;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < 2; ++k) {
      effects.push_back(settings[s][k]);
      n.push_back(counts[s][k]);
    }
  return TomographyDataset(2, effects, n);
}

// -lambda/2 on the Bloch ball for X, Y, Z counts, written out by hand
double bloch_loglik(const std::array<std::array<std::int64_t, 2>, 3>& c, double x, double y, double z) {
  const double r[3] = {x, y, z};
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double p = 0.5 * (1.0 + r[a]), q = 0.5 * (1.0 - r[a]);
    if ((c[a][0] > 0 && p <= 0.0) || (c[a][1] > 0 && q <= 0.0)) return -std::numeric_limits<double>::infinity();
    s += (c[a][0] > 0 ? c[a][0] * std::log(p) : 0.0) + (c[a][1] > 0 ? c[a][1] * std::log(q) : 0.0);
  }
  return s;
}

std::array<double, 3> grid_search(const std::array<std::array<std::int64_t, 2>, 3>& c) {
  std::array<double, 3> best{0, 0, 0};
  double best_v = bloch_loglik(c, 0, 0, 0);
  double step = 1e-2;
  double half = 1.0;
  while (step >= 1e-9) {
    const auto centre = best;
    const int k = static_cast<int>(std::round(half / step));
    for (int i = -k; i <= k; ++i)
      for (int j = -k; j <= k; ++j)
        for (int l = -k; l <= k; ++l) {
          const double x = centre[0] + i * step, y = centre[1] + j * step, z = centre[2] + l * step;
          if (x * x + y * y + z * z > 1.0) continue;
          const double v = bloch_loglik(c, x, y, z);
          if (v > best_v) best_v = v, best = {x, y, z};
        }
    half = 2.0 * step;
    step /= 10.0;
  }
  return best;
}

}  // namespace

TEST_CASE("agrees with a grid search over the Bloch ball") {
  const std::array<std::array<std::int64_t, 2>, 3> c{{{50, 50}, {50, 50}, {75, 25}}};
  const auto r = grid_search(c);
  CHECK(std::abs(r[2] - 0.5) < 1e-6);
  const auto res = mle(counts_on_pauli_bases(c));
  REQUIRE(res.converged);
  const CMatrix& rho = res.state.matrix();
  CHECK(std::abs(rho(0, 0).real() - 0.5 * (1.0 + r[2])) < 1e-6);
  CHECK(std::abs(rho(1, 1).real() - 0.5 * (1.0 - r[2])) < 1e-6);
  CHECK(std::abs(2.0 * rho(0, 1).real() - r[0]) < 1e-6);
  CHECK(std::abs(-2.0 * rho(0, 1).imag() - r[1]) < 1e-6);
  CHECK(std::abs(rho(0, 0).real() - 0.75) < 1e-6);
}

TEST_CASE("agrees with the grid search on skewed counts") {
  const std::array<std::array<std::int64_t, 2>, 3> c{{{30, 10}, {12, 28}, {22, 18}}};
  const auto r = grid_search(c);
  const auto res = mle(counts_on_pauli_bases(c));
  const CMatrix& rho = res.state.matrix();
  CHECK(std::abs(2.0 * rho(0, 1).real() - r[0]) < 1e-5);
  CHECK(std::abs(-2.0 * rho(0, 1).imag() - r[1]) < 1e-5);
  CHECK(std::abs(rho(0, 0).real() - rho(1, 1).real() - r[2]) < 1e-5);
}

TEST_CASE("recovers a pure state from exact expected counts") {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  const auto psi = PureState(v);
  const auto settings = standard_pauli_settings(2);
  std::vector<PovmEffect> effects;
  std::vector<std::int64_t> counts;
  for (const auto& s : settings)
    for (const auto& e : s) {
      const double p = (psi.amplitudes().adjoint() * e.matrix() * psi.amplitudes())(0, 0).real();
      effects.push_back(e);
      counts.push_back(std::llround(400.0 * p));
      CHECK(std::abs(400.0 * p - static_cast<double>(counts.back())) < 1e-9);
    }
  const TomographyDataset data(4, effects, counts);
  MleOptions opt;
  opt.tol = 1e-14;
  opt.max_iter = 1000000;
  const auto res = mle(data, opt);
  CHECK(FigureOfMerit::fidelity2_to_pure(psi).evaluate(res.state) > 1.0 - 1e-6);
  CHECK(std::abs(res.log_likelihood - log_likelihood(res.state, data)) < 1e-9);
  CHECK(res.log_likelihood <= log_likelihood(DensityMatrix::from_pure(psi), data) + 1e-6);
}

TEST_CASE("flat likelihood returns the maximally mixed state") {
  const TomographyDataset flat(3, {PovmEffect(CMatrix::Identity(3, 3))}, {10});
  const auto res = mle(flat);
  CHECK(res.converged);
  CHECK((res.state.matrix() - CMatrix::Identity(3, 3) / 3.0).norm() < 1e-14);
}

TEST_CASE("lambda never increases along iterates") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const int qubits = 1 + t % 2;
    const int d = 1 << qubits;
    const auto truth = rho_from_point(random_point(d, rng));
    const auto data = simulate_dataset(truth, standard_pauli_settings(qubits), 20 + t, rng);
    MleOptions opt;
    opt.record_history = true;
    const auto res = mle(data, opt);
    REQUIRE(res.history.size() >= 1);
    for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] <= res.history[i - 1]);
    CHECK(std::abs(res.log_likelihood - log_likelihood(res.state, data)) < 1e-9);
    CHECK(res.state.eigenvalues()(0) > -1e-10);
  }
}

TEST_CASE("non-convergence returns the best iterate") {
  Rng rng(4);
  const auto truth = rho_from_point(random_point(4, rng));
  const auto data = simulate_dataset(truth, standard_pauli_settings(2), 100, rng);
  MleOptions opt;
  opt.max_iter = 2;
  opt.record_history = true;
  const auto res = mle(data, opt);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
  CHECK(res.log_likelihood == doctest::Approx(res.history.back()));
}
