#include "qeb/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qeb {

namespace {

void require_dim(int rho_dim, const TomographyDataset& data) {
  if (rho_dim != data.dim()) {
    std::ostringstream os;
    os << "log_likelihood: state has dimension " << rho_dim << " but the data has dimension "
       << data.dim();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

double log_likelihood(const DensityMatrix& rho, const TomographyDataset& data) {
  require_dim(rho.dim(), data);
  double sum = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::int64_t n = data.counts()[k];
    if (n == 0) continue;
    const Complex p = (data.effects()[k].matrix() * rho.matrix()).trace();
    if (std::abs(p.imag()) > 1e-9) {
      std::ostringstream os;
      os << "log_likelihood: tr(E_k rho) has imaginary part " << p.imag() << " (k = " << k << ")";
      throw std::logic_error(os.str());
    }
    if (p.real() < kMinProbability) return kInfiniteLogLikelihood;
    sum += static_cast<double>(n) * std::log(p.real());
  }
  return -2.0 * sum;
}

double log_likelihood_ratio(const DensityMatrix& rho_new, const DensityMatrix& rho_old,
                            const TomographyDataset& data) {
  const double a = log_likelihood(rho_new, data);
  const double b = log_likelihood(rho_old, data);
  if (a == kInfiniteLogLikelihood && b == kInfiniteLogLikelihood) return 0.0;
  return a - b;
}

std::vector<double> pack_hermitian(const CMatrix& m) {
  const auto d = static_cast<int>(m.rows());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i) v.push_back(m(i, i).real());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      v.push_back(std::numbers::sqrt2 * m(i, j).real());
      v.push_back(std::numbers::sqrt2 * m(i, j).imag());
    }
  return v;
}

LikelihoodEvaluator::LikelihoodEvaluator(const TomographyDataset& data)
    : dim_(data.dim()), packed_size_(static_cast<std::size_t>(data.dim() * data.dim())) {
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data.counts()[k] == 0) continue;
    auto packed = pack_hermitian(data.effects()[k].matrix());
    effects_.insert(effects_.end(), packed.begin(), packed.end());
    counts_.push_back(static_cast<double>(data.counts()[k]));
  }
}

double LikelihoodEvaluator::from_packed(std::span<const double> packed) const {
  double sum = 0.0;
  const double* e = effects_.data();
  for (std::size_t k = 0; k < counts_.size(); ++k, e += packed_size_) {
    double p = 0.0;
    for (std::size_t a = 0; a < packed_size_; ++a) p += e[a] * packed[a];
    if (p < kMinProbability) return kInfiniteLogLikelihood;
    sum += counts_[k] * std::log(p);
  }
  return -2.0 * sum;
}

double LikelihoodEvaluator::from_coords(std::span<const double> coords,
                                        std::span<double> scratch) const {
  const int d = dim_;
  const int dd = d * d;
  const double* re = coords.data();
  const double* im = coords.data() + dd;
  // rho_ij = sum_k T_ik conj(T_jk); T(i,k) lives at index i + k*d.
  std::size_t out = 0;
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const int a = i + k * d;
      s += re[a] * re[a] + im[a] * im[a];
    }
    scratch[out++] = s;
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double sr = 0.0;
      double si = 0.0;
      for (int k = 0; k < d; ++k) {
        const int a = i + k * d;
        const int b = j + k * d;
        sr += re[a] * re[b] + im[a] * im[b];
        si += im[a] * re[b] - re[a] * im[b];
      }
      scratch[out++] = std::numbers::sqrt2 * sr;
      scratch[out++] = std::numbers::sqrt2 * si;
    }
  return from_packed(scratch.first(packed_size_));
}

double LikelihoodEvaluator::from_coords(std::span<const double> coords) const {
  std::vector<double> scratch(packed_size_);
  return from_coords(coords, scratch);
}

double LikelihoodEvaluator::from_rho(const DensityMatrix& rho) const {
  if (rho.dim() != dim_) throw std::invalid_argument("LikelihoodEvaluator: dimension mismatch");
  return from_packed(pack_hermitian(rho.matrix()));
}

}  // namespace qeb
