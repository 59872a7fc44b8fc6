#include "qeb/tomodata.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace qeb {

namespace {

constexpr double kCompletenessTol = 1e-9;
constexpr double kMergeGrid = 1e-12;

std::vector<std::int64_t> merge_key(const CMatrix& m) {
  std::vector<std::int64_t> key;
  key.reserve(2 * m.size() + 1);
  key.push_back(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      key.push_back(std::llround(m(i, j).real() / kMergeGrid));
      key.push_back(std::llround(m(i, j).imag() / kMergeGrid));
    }
  return key;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Single-qubit projective measurements, eigenvalue +1 outcome first.
std::vector<Povm> single_qubit_pauli_bases() {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex I(0.0, 1.0);
  auto proj = [](Complex a, Complex b) {
    CVector v(2);
    v << a, b;
    return PovmEffect(v * v.adjoint());
  };
  return {
      {proj(r, r), proj(r, -r)},          // X
      {proj(r, r * I), proj(r, -r * I)},  // Y
      {proj(1.0, 0.0), proj(0.0, 1.0)},   // Z
  };
}

std::vector<Povm> tensor_power(const std::vector<Povm>& single, int num_qubits) {
  std::vector<Povm> out = single;
  for (int q = 1; q < num_qubits; ++q) {
    std::vector<Povm> next;
    next.reserve(out.size() * single.size());
    for (const Povm& a : out)
      for (const Povm& b : single) next.push_back(tensor_settings(a, b));
    out = std::move(next);
  }
  return out;
}

}  // namespace

// --- PovmEffect ---

PovmEffect::PovmEffect(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols())
    throw std::invalid_argument("PovmEffect: expected a non-empty square matrix");
  if (double h = (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); h > tol::hermitian) {
    std::ostringstream os;
    os << "PovmEffect: not Hermitian (max defect " << h << ")";
    throw std::invalid_argument(os.str());
  }
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  const RVector& ev = es.eigenvalues();
  if (ev(0) < -tol::psd || ev(ev.size() - 1) > 1.0 + tol::psd) {
    std::ostringstream os;
    os << "PovmEffect: eigenvalues must lie in [0, 1], got range [" << ev(0) << ", "
       << ev(ev.size() - 1) << "]";
    throw std::invalid_argument(os.str());
  }
}

// --- TomographyDataset ---

TomographyDataset::TomographyDataset(int dim, std::vector<PovmEffect> effects,
                                     std::vector<std::int64_t> counts,
                                     std::optional<std::int64_t> declared_total,
                                     std::optional<ExperimentDesign> design)
    : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("TomographyDataset: dim must be positive");
  if (effects.size() != counts.size()) {
    std::ostringstream os;
    os << "TomographyDataset: " << effects.size() << " effects but " << counts.size() << " counts";
    throw std::invalid_argument(os.str());
  }
  if (effects.empty()) throw std::invalid_argument("TomographyDataset: no effects");

  std::map<std::vector<std::int64_t>, std::size_t> seen;
  std::vector<std::size_t> remap(effects.size());
  for (std::size_t k = 0; k < effects.size(); ++k) {
    if (effects[k].dim() != dim) {
      std::ostringstream os;
      os << "TomographyDataset: effect " << k << " has dimension " << effects[k].dim()
         << ", expected " << dim;
      throw std::invalid_argument(os.str());
    }
    if (counts[k] < 0) {
      std::ostringstream os;
      os << "TomographyDataset: count " << k << " is negative (" << counts[k] << ")";
      throw std::invalid_argument(os.str());
    }
    auto [it, inserted] = seen.try_emplace(merge_key(effects[k].matrix()), effects_.size());
    if (inserted) {
      effects_.push_back(std::move(effects[k]));
      counts_.push_back(counts[k]);
    } else {
      counts_[it->second] += counts[k];
    }
    remap[k] = it->second;
    total_ += counts[k];
  }
  if (total_ <= 0) throw std::invalid_argument("TomographyDataset: at least one count must be positive");
  if (declared_total && *declared_total != total_) {
    std::ostringstream os;
    os << "TomographyDataset: declared total " << *declared_total << " but counts sum to " << total_;
    throw std::invalid_argument(os.str());
  }
  if (design) {
    for (auto& setting : design->settings)
      for (auto& idx : setting) {
        if (idx >= remap.size())
          throw std::invalid_argument("TomographyDataset: design references a missing effect");
        idx = remap[idx];
      }
    design_ = std::move(design);
  }
}

std::vector<Povm> TomographyDataset::settings() const {
  if (!design_) throw std::logic_error("TomographyDataset: no experiment design attached");
  std::vector<Povm> out;
  for (const auto& setting : design_->settings) {
    Povm p;
    for (std::size_t idx : setting) p.push_back(effects_.at(idx));
    out.push_back(std::move(p));
  }
  return out;
}

// --- calibration ---

void CalibrationReadout::validate() const {
  if (q0.empty()) throw std::invalid_argument("CalibrationReadout: no bins");
  if (q0.size() != q1.size()) {
    std::ostringstream os;
    os << "CalibrationReadout: q0 has " << q0.size() << " bins but q1 has " << q1.size();
    throw std::invalid_argument(os.str());
  }
  for (const auto* q : {&q0, &q1}) {
    double s = 0.0;
    for (double v : *q) {
      if (v < 0.0) throw std::invalid_argument("CalibrationReadout: negative bin probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "CalibrationReadout: bin probabilities sum to " << s << ", expected 1";
      throw std::invalid_argument(os.str());
    }
  }
  for (std::size_t i = 0; i < rotations.size(); ++i) {
    const CMatrix& u = rotations[i];
    if (u.rows() != 2 || u.cols() != 2)
      throw std::invalid_argument("CalibrationReadout: rotations must be 2x2");
    if ((u.adjoint() * u - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-10) {
      std::ostringstream os;
      os << "CalibrationReadout: rotation " << i << " is not unitary";
      throw std::invalid_argument(os.str());
    }
  }
}

Povm build_effective_povm(const CalibrationReadout& cal, std::size_t setting) {
  cal.validate();
  if (setting >= cal.rotations.size()) {
    std::ostringstream os;
    os << "build_effective_povm: setting " << setting << " out of range (" << cal.rotations.size()
       << " rotations)";
    throw std::invalid_argument(os.str());
  }
  const CMatrix& u = cal.rotations[setting];
  Povm out;
  out.reserve(cal.bins());
  for (std::size_t k = 0; k < cal.bins(); ++k) {
    CMatrix diag = CMatrix::Zero(2, 2);
    diag(0, 0) = cal.q0[k];
    diag(1, 1) = cal.q1[k];
    out.emplace_back(u.adjoint() * diag * u);
  }
  return out;
}

PovmEffect tensor_effects(const PovmEffect& a, const PovmEffect& b) {
  return PovmEffect(kron(a.matrix(), b.matrix()));
}

Povm tensor_settings(const Povm& a, const Povm& b) {
  Povm out;
  out.reserve(a.size() * b.size());
  for (const auto& ea : a)
    for (const auto& eb : b) out.push_back(tensor_effects(ea, eb));
  return out;
}

std::vector<Povm> standard_pauli_settings(int num_qubits) {
  if (num_qubits < 1) throw std::invalid_argument("standard_pauli_settings: need at least one qubit");
  return tensor_power(single_qubit_pauli_bases(), num_qubits);
}

std::vector<Povm> calibrated_settings(const CalibrationReadout& cal, int num_qubits) {
  if (num_qubits < 1) throw std::invalid_argument("calibrated_settings: need at least one qubit");
  std::vector<Povm> single;
  for (std::size_t i = 0; i < cal.rotations.size(); ++i) single.push_back(build_effective_povm(cal, i));
  return tensor_power(single, num_qubits);
}

void check_completeness(const Povm& setting) {
  if (setting.empty()) throw std::invalid_argument("setting has no effects");
  const int d = setting.front().dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& e : setting) {
    if (e.dim() != d) throw std::invalid_argument("setting mixes effect dimensions");
    sum += e.matrix();
  }
  if (double dev = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff(); dev > kCompletenessTol) {
    std::ostringstream os;
    os << "setting effects do not sum to the identity (max deviation " << dev << ")";
    throw std::invalid_argument(os.str());
  }
}

TomographyDataset simulate_dataset(const DensityMatrix& rho_true, const std::vector<Povm>& settings,
                                   std::int64_t shots_per_setting, Rng& rng) {
  if (shots_per_setting <= 0) throw std::invalid_argument("simulate_dataset: shots must be positive");
  if (settings.empty()) throw std::invalid_argument("simulate_dataset: no settings");

  std::vector<PovmEffect> effects;
  std::vector<std::int64_t> counts;
  ExperimentDesign design;
  design.shots_per_setting = shots_per_setting;

  for (std::size_t s = 0; s < settings.size(); ++s) {
    const Povm& setting = settings[s];
    check_completeness(setting);
    if (setting.front().dim() != rho_true.dim())
      throw std::invalid_argument("simulate_dataset: setting dimension does not match the state");
    std::vector<double> probs;
    probs.reserve(setting.size());
    for (std::size_t k = 0; k < setting.size(); ++k) {
      const double p = (setting[k].matrix() * rho_true.matrix()).trace().real();
      if (p < -1e-12) {
        std::ostringstream os;
        os << "simulate_dataset: negative outcome probability " << p << " (setting " << s
           << ", effect " << k << ")";
        throw std::invalid_argument(os.str());
      }
      probs.push_back(std::max(p, 0.0));
    }
    std::discrete_distribution<std::size_t> outcome(probs.begin(), probs.end());
    std::vector<std::int64_t> local(setting.size(), 0);
    for (std::int64_t shot = 0; shot < shots_per_setting; ++shot) ++local[outcome(rng)];

    std::vector<std::size_t> indices;
    for (std::size_t k = 0; k < setting.size(); ++k) {
      indices.push_back(effects.size());
      effects.push_back(setting[k]);
      counts.push_back(local[k]);
    }
    design.settings.push_back(std::move(indices));
  }
  return TomographyDataset(rho_true.dim(), std::move(effects), std::move(counts), std::nullopt,
                           std::move(design));
}

}  // namespace qeb
