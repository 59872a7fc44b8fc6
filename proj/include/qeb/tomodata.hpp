#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qeb/statespace.hpp"

namespace qeb {

/// Hermitian operator with spectrum in [0, 1] (up to 1e-10).
class PovmEffect {
 public:
  explicit PovmEffect(CMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// One measurement setting: effects that sum to the identity.
using Povm = std::vector<PovmEffect>;

/// How the counts were produced: which effects belong to which setting, and how
/// many shots each setting received. Needed to resample a dataset (bootstrap).
struct ExperimentDesign {
  std::vector<std::vector<std::size_t>> settings;  // indices into the dataset's effects
  std::int64_t shots_per_setting = 0;
};

/// Distinct effects E_k with observed counts n_k.
///
/// Effects that are equal entrywise after rounding to a 1e-12 grid are merged and
/// their counts summed; the design (if any) is remapped accordingly.
class TomographyDataset {
 public:
  TomographyDataset(int dim, std::vector<PovmEffect> effects, std::vector<std::int64_t> counts,
                    std::optional<std::int64_t> declared_total = std::nullopt,
                    std::optional<ExperimentDesign> design = std::nullopt);

  int dim() const { return dim_; }
  std::size_t size() const { return effects_.size(); }
  const std::vector<PovmEffect>& effects() const { return effects_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  const std::optional<ExperimentDesign>& design() const { return design_; }

  /// Settings rebuilt from the design; throws std::logic_error if there is none.
  std::vector<Povm> settings() const;

 private:
  int dim_;
  std::vector<PovmEffect> effects_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  std::optional<ExperimentDesign> design_;
};

/// Binned single-qubit readout calibration: q0(k), q1(k) are the bin probabilities
/// for trusted |0> and |1> preparations; rotations U_i map measurement bases onto
/// the computational basis.
struct CalibrationReadout {
  std::vector<double> q0;
  std::vector<double> q1;
  std::vector<CMatrix> rotations;

  std::size_t bins() const { return q0.size(); }
  /// Throws std::invalid_argument on any invariant violation.
  void validate() const;
};

/// Q'_i(k) = U_i^dagger diag(q0(k), q1(k)) U_i for k = 0..B-1.
Povm build_effective_povm(const CalibrationReadout& cal, std::size_t setting);

/// Kronecker product a (x) b.
PovmEffect tensor_effects(const PovmEffect& a, const PovmEffect& b);

/// Tensor product of two settings; outcome (i, j) sits at index i * b.size() + j.
Povm tensor_settings(const Povm& a, const Povm& b);

/// All 3^n products of single-qubit X, Y, Z eigenbases. The first qubit varies
/// slowest; within each setting outcome bits are ordered like the Kronecker product.
std::vector<Povm> standard_pauli_settings(int num_qubits);

/// Same construction with each single-qubit measurement replaced by the calibrated
/// effective POVM of every rotation in `cal`.
std::vector<Povm> calibrated_settings(const CalibrationReadout& cal, int num_qubits);

/// Throws std::invalid_argument unless the effects sum to the identity within 1e-9.
void check_completeness(const Povm& setting);

/// Draws `shots_per_setting` multinomial outcomes per setting from tr(E rho_true)
/// and aggregates the counts per distinct effect. The returned dataset carries the design.
TomographyDataset simulate_dataset(const DensityMatrix& rho_true, const std::vector<Povm>& settings,
                                   std::int64_t shots_per_setting, Rng& rng);

}  // namespace qeb
