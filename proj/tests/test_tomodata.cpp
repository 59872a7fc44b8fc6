#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qeb/tomodata.hpp"

using namespace qeb;

namespace {

CMatrix diag(std::initializer_list<double> v) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

CalibrationReadout readout(std::vector<double> q0, std::vector<double> q1, std::vector<CMatrix> rot) {
  CalibrationReadout c;
  c.q0 = std::move(q0);
  c.q1 = std::move(q1);
  c.rotations = std::move(rot);
  return c;
}

CMatrix hadamard() {
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("effects outside [0, 1] are rejected") {
  CHECK_THROWS_AS(PovmEffect(diag({1.5, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(PovmEffect(diag({-0.1, 0.5})), std::invalid_argument);
  CMatrix nh = diag({0.5, 0.5});
  nh(0, 1) = 0.2;
  CHECK_THROWS_AS(PovmEffect{nh}, std::invalid_argument);
  CHECK_NOTHROW(PovmEffect(diag({1.0, 0.0})));
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(TomographyDataset(2, {PovmEffect(diag({1, 0}))}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(TomographyDataset(2, {PovmEffect(diag({1, 0}))}, {-1}), std::invalid_argument);
  CHECK_THROWS_AS(TomographyDataset(2, {PovmEffect(diag({1, 0}))}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(TomographyDataset(2, {PovmEffect(diag({1, 0}))}, {3}, 4), std::invalid_argument);
  CHECK_THROWS_AS(TomographyDataset(3, {PovmEffect(diag({1, 0}))}, {3}), std::invalid_argument);
}

TEST_CASE("duplicate effects are merged with summed counts") {
  TomographyDataset d(2, {PovmEffect(diag({1, 0})), PovmEffect(diag({0, 1})), PovmEffect(diag({1, 1e-15}))},
                      {3, 1, 4});
  REQUIRE(d.size() == 2);
  CHECK(d.counts()[0] == 7);
  CHECK(d.counts()[1] == 1);
  CHECK(d.total() == 8);
}

TEST_CASE("design indices follow merged effects") {
  ExperimentDesign design{{{0, 1}, {2, 3}}, 10};
  TomographyDataset d(2,
                      {PovmEffect(diag({1, 0})), PovmEffect(diag({0, 1})), PovmEffect(diag({0, 1})),
                       PovmEffect(diag({1, 0}))},
                      {6, 4, 5, 5}, std::nullopt, design);
  REQUIRE(d.size() == 2);
  const auto settings = d.settings();
  REQUIRE(settings.size() == 2);
  CHECK((settings[1][0].matrix() - diag({0, 1})).norm() == 0.0);
  CHECK((settings[1][1].matrix() - diag({1, 0})).norm() == 0.0);
}

TEST_CASE("effective POVM from calibration") {
  auto ideal = build_effective_povm(readout({1, 0}, {0, 1}, {CMatrix::Identity(2, 2)}), 0);
  REQUIRE(ideal.size() == 2);
  CHECK((ideal[0].matrix() - diag({1, 0})).norm() < 1e-15);
  CHECK((ideal[1].matrix() - diag({0, 1})).norm() < 1e-15);

  auto noisy = build_effective_povm(readout({0.9, 0.1}, {0.2, 0.8}, {CMatrix::Identity(2, 2)}), 0);
  CHECK((noisy[0].matrix() - diag({0.9, 0.2})).norm() < 1e-15);
  CHECK((noisy[1].matrix() - diag({0.1, 0.8})).norm() < 1e-15);

  // rotated, three bins: completeness holds for any valid readout
  auto binned = build_effective_povm(readout({0.7, 0.2, 0.1}, {0.05, 0.15, 0.8}, {hadamard()}), 0);
  CHECK(binned.size() == 3);
  CHECK_NOTHROW(check_completeness(binned));
  CHECK_THROWS_AS(build_effective_povm(readout({0.7, 0.2}, {0.5, 0.6}, {hadamard()}), 0), std::invalid_argument);
}

TEST_CASE("tensor products") {
  const PovmEffect id(CMatrix::Identity(2, 2));
  CHECK((tensor_effects(id, id).matrix() - CMatrix::Identity(4, 4)).norm() == 0.0);
  CHECK((tensor_effects(PovmEffect(diag({1, 0})), PovmEffect(diag({0, 1}))).matrix() - diag({0, 1, 0, 0})).norm() ==
        0.0);
  CHECK((tensor_effects(PovmEffect(diag({0.9, 0.2})), PovmEffect(diag({0.5, 0.5}))).matrix() -
         diag({0.45, 0.45, 0.1, 0.1}))
            .norm() < 1e-15);
}

TEST_CASE("standard Pauli settings") {
  const auto one = standard_pauli_settings(1);
  CHECK(one.size() == 3);
  for (const auto& s : one) CHECK(s.size() == 2);
  const auto two = standard_pauli_settings(2);
  CHECK(two.size() == 9);
  for (const auto& s : two) {
    CHECK(s.size() == 4);
    CHECK_NOTHROW(check_completeness(s));
  }
  // Z basis is the third setting, +1 eigenvector first
  CHECK((one[2][0].matrix() - diag({1, 0})).norm() < 1e-15);
}

TEST_CASE("simulation") {
  Rng rng(5);
  const auto z = standard_pauli_settings(1)[2];
  const auto zero = DensityMatrix(diag({1, 0}));
  const auto d0 = simulate_dataset(zero, {z}, 123, rng);
  CHECK(d0.counts()[0] == 123);
  CHECK(d0.counts()[1] == 0);

  CMatrix rho = 0.05 / 4.0 * CMatrix::Identity(4, 4);
  CVector psi = CVector::Zero(4);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = Complex(0, 1.0 / std::sqrt(2.0));
  rho += 0.95 * psi * psi.adjoint();
  const auto d = simulate_dataset(DensityMatrix(rho), standard_pauli_settings(2), 500, rng);
  CHECK(d.total() == 4500);
  CHECK(d.design()->settings.size() == 9);

  const int shots = 100000;
  const auto half = simulate_dataset(DensityMatrix::maximally_mixed(2), {z}, shots, rng);
  const double freq = static_cast<double>(half.counts()[0]) / shots;
  CHECK(std::abs(freq - 0.5) < 3.0 * 0.5 / std::sqrt(double(shots)));

  Rng a(9), b(9);
  const auto x = simulate_dataset(DensityMatrix(rho), standard_pauli_settings(2), 50, a);
  const auto y = simulate_dataset(DensityMatrix(rho), standard_pauli_settings(2), 50, b);
  CHECK(x.counts() == y.counts());
}

TEST_CASE("calibrated settings are complete") {
  const auto cal = readout({0.9, 0.1}, {0.2, 0.8}, {hadamard(), CMatrix::Identity(2, 2)});
  const auto settings = calibrated_settings(cal, 2);
  CHECK(settings.size() == 4);
  for (const auto& s : settings) CHECK_NOTHROW(check_completeness(s));
}
