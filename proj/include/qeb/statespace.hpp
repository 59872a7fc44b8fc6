#pragma once

#include <span>
#include <vector>

#include "qeb/types.hpp"

namespace qeb {

/// Tolerances shared by the state-space invariants.
namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double psd = 1e-10;
inline constexpr double unit_norm = 1e-12;
}  // namespace tol

class PureState {
 public:
  /// Throws std::invalid_argument unless the amplitudes have unit norm within 1e-12.
  explicit PureState(CVector amplitudes);

  /// Normalizes the given amplitudes first.
  static PureState normalized(CVector amplitudes);
  static PureState basis(int dim, int index);

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  CMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  CVector amps_;
};

/// A d x d Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates all invariants; throws std::invalid_argument on violation.
  explicit DensityMatrix(CMatrix m);

  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix from_pure(const PureState& psi);

  /// Skips the eigenvalue check. Only for matrices that are PSD by construction
  /// (e.g. T T^dagger); the matrix is Hermitized and the trace is still checked.
  static DensityMatrix from_trusted(CMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  /// Ascending eigenvalues.
  RVector eigenvalues() const;
  double purity() const;

 private:
  struct Trusted {};
  DensityMatrix(CMatrix m, Trusted);
  CMatrix m_;
};

/// Point on the unit (2d^2 - 1)-sphere encoding a matrix T with rho = T T^dagger.
///
/// Coordinate layout: the d^2 real parts of T in column-major order, followed by
/// the d^2 imaginary parts in column-major order, so coords[i + j*d] = Re T(i,j)
/// and coords[d*d + i + j*d] = Im T(i,j).
class StatePoint {
 public:
  /// Throws if coords.size() != 2*dim*dim or the Euclidean norm differs from 1 by more than 1e-12.
  StatePoint(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::span<const double> coords() const { return coords_; }
  CMatrix t_matrix() const;

 private:
  int dim_;
  std::vector<double> coords_;
};

DensityMatrix rho_from_point(const StatePoint& p);

/// Uses the principal (PSD) square root T = rho^{1/2}.
StatePoint point_from_rho(const DensityMatrix& rho);

/// PSD square root of a Hermitian matrix; throws if an eigenvalue is below -1e-8.
CMatrix hermitian_sqrt(const CMatrix& m);

/// Uniform point on the sphere, i.e. a Hilbert-Schmidt distributed state.
StatePoint random_point(int dim, Rng& rng);

/// Packs T into the coordinate layout documented on StatePoint (no normalization).
std::vector<double> coords_from_t(const CMatrix& t);

}  // namespace qeb
