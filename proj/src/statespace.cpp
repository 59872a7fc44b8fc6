#include "qeb/statespace.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace qeb {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

double hermiticity_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

// --- PureState ---

PureState::PureState(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
  if (std::abs(amps_.norm() - 1.0) > tol::unit_norm) {
    std::ostringstream os;
    os << "PureState: amplitudes must have unit norm, got " << amps_.norm();
    throw std::invalid_argument(os.str());
  }
}

PureState PureState::normalized(CVector amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw std::invalid_argument("PureState: zero amplitude vector");
  return PureState(amplitudes / n);
}

PureState PureState::basis(int dim, int index) {
  if (index < 0 || index >= dim) throw std::invalid_argument("PureState::basis: index out of range");
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return PureState(std::move(v));
}

// --- DensityMatrix ---

DensityMatrix::DensityMatrix(CMatrix m, Trusted) : m_(std::move(m)) {}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (double h = hermiticity_defect(m_); h > tol::hermitian) {
    std::ostringstream os;
    os << "DensityMatrix: not Hermitian (max |rho - rho^dagger| = " << h << ")";
    throw std::invalid_argument(os.str());
  }
  if (double t = m_.trace().real(); std::abs(t - 1.0) > tol::trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace must be 1, got " << t;
    throw std::invalid_argument(os.str());
  }
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  if (double ev = eigenvalues()(0); ev < -tol::psd) {
    std::ostringstream os;
    os << "DensityMatrix: not positive semidefinite (min eigenvalue " << ev << ")";
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw std::invalid_argument("DensityMatrix::maximally_mixed: dim must be positive");
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim), Trusted{});
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return from_trusted(psi.projector());
}

DensityMatrix DensityMatrix::from_trusted(CMatrix m) {
  require_square(m, "DensityMatrix");
  m = 0.5 * (m + m.adjoint()).eval();
  if (double t = m.trace().real(); std::abs(t - 1.0) > tol::trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace must be 1, got " << t;
    throw std::invalid_argument(os.str());
  }
  return DensityMatrix(std::move(m), Trusted{});
}

RVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double DensityMatrix::purity() const {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return m_.squaredNorm();
}

// --- StatePoint ---

StatePoint::StatePoint(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 1) throw std::invalid_argument("StatePoint: dim must be positive");
  const auto expected = static_cast<std::size_t>(2 * dim * dim);
  if (coords_.size() != expected) {
    std::ostringstream os;
    os << "StatePoint: expected " << expected << " coordinates for dim " << dim << ", got "
       << coords_.size();
    throw std::invalid_argument(os.str());
  }
  double n2 = 0.0;
  for (double c : coords_) n2 += c * c;
  if (std::abs(std::sqrt(n2) - 1.0) > tol::unit_norm) {
    std::ostringstream os;
    os << "StatePoint: coordinates must have unit norm, got " << std::sqrt(n2);
    throw std::invalid_argument(os.str());
  }
}

CMatrix StatePoint::t_matrix() const {
  const int d = dim_;
  const int dd = d * d;
  CMatrix t(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) t(i, j) = Complex(coords_[i + j * d], coords_[dd + i + j * d]);
  return t;
}

std::vector<double> coords_from_t(const CMatrix& t) {
  const auto d = static_cast<int>(t.rows());
  const int dd = d * d;
  std::vector<double> c(2 * dd);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      c[i + j * d] = t(i, j).real();
      c[dd + i + j * d] = t(i, j).imag();
    }
  return c;
}

DensityMatrix rho_from_point(const StatePoint& p) {
  const CMatrix t = p.t_matrix();
  return DensityMatrix::from_trusted(t * t.adjoint());
}

CMatrix hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  RVector ev = es.eigenvalues();
  if (ev(0) < -1e-8) {
    std::ostringstream os;
    os << "hermitian_sqrt: matrix has negative eigenvalue " << ev(0);
    throw std::invalid_argument(os.str());
  }
  RVector root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

StatePoint point_from_rho(const DensityMatrix& rho) {
  std::vector<double> c = coords_from_t(hermitian_sqrt(rho.matrix()));
  double n2 = 0.0;
  for (double x : c) n2 += x * x;
  const double n = std::sqrt(n2);
  for (double& x : c) x /= n;
  return StatePoint(rho.dim(), std::move(c));
}

StatePoint random_point(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("random_point: dim must be positive");
  std::normal_distribution<double> normal;
  std::vector<double> g(static_cast<std::size_t>(2 * dim * dim));
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : g) {
      x = normal(rng);
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double n = std::sqrt(n2);
  for (double& x : g) x /= n;
  return StatePoint(dim, std::move(g));
}

}  // namespace qeb
