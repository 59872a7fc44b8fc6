#include "qeb/mle.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "qeb/likelihood.hpp"

namespace qeb {

namespace {

struct Iterate {
  CMatrix rho;
  double lambda;
};

class MleProblem {
 public:
  explicit MleProblem(const TomographyDataset& data) : dim_(data.dim()), eval_(data) {
    const auto n = static_cast<double>(data.total());
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (data.counts()[k] == 0) continue;
      effects_.push_back(data.effects()[k].matrix());
      weights_.push_back(static_cast<double>(data.counts()[k]) / n);
    }
  }

  double lambda(const CMatrix& rho) const {
    return eval_.from_rho(DensityMatrix::from_trusted(rho));
  }

  CMatrix r_operator(const CMatrix& rho) const {
    CMatrix r = CMatrix::Zero(dim_, dim_);
    for (std::size_t k = 0; k < effects_.size(); ++k) {
      const double p = (effects_[k] * rho).trace().real();
      r += (weights_[k] / p) * effects_[k];
    }
    return r;
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  LikelihoodEvaluator eval_;
  std::vector<CMatrix> effects_;
  std::vector<double> weights_;
};

CMatrix conjugate_normalized(const CMatrix& m, const CMatrix& rho) {
  CMatrix next = m * rho * m.adjoint();
  next = 0.5 * (next + next.adjoint()).eval();
  return next / next.trace().real();
}

}  // namespace

MleResult mle(const TomographyDataset& data, const MleOptions& options) {
  const MleProblem problem(data);
  const int d = problem.dim();
  const CMatrix identity = CMatrix::Identity(d, d);

  Iterate cur{identity / static_cast<double>(d), 0.0};
  cur.lambda = problem.lambda(cur.rho);
  if (cur.lambda == kInfiniteLogLikelihood)
    throw std::invalid_argument("mle: an observed effect has zero probability for every state");

  MleResult result{DensityMatrix::from_trusted(cur.rho), cur.lambda, 0, false, {}};
  if (options.record_history) result.history.push_back(cur.lambda);

  std::int64_t it = 0;
  bool converged = false;
  while (it < options.max_iter) {
    ++it;
    const CMatrix r = problem.r_operator(cur.rho);
    // plain R rho R first, then diluted steps with decreasing e
    std::optional<Iterate> next;
    {
      CMatrix cand = conjugate_normalized(r, cur.rho);
      const double l = problem.lambda(cand);
      if (l <= cur.lambda) next = Iterate{std::move(cand), l};
    }
    for (double e = 1.0; !next && e > 1e-12; e *= 0.5) {
      CMatrix cand = conjugate_normalized(identity + e * r, cur.rho);
      const double l = problem.lambda(cand);
      if (l <= cur.lambda) next = Iterate{std::move(cand), l};
    }
    if (!next) {
      converged = true;  // no descent direction left at double precision
      break;
    }
    const double decrease = cur.lambda - next->lambda;
    cur = std::move(*next);
    if (options.record_history) result.history.push_back(cur.lambda);
    if (decrease < options.tol) {
      converged = true;
      break;
    }
  }

  result.state = DensityMatrix::from_trusted(cur.rho);
  result.log_likelihood = log_likelihood(result.state, data);
  result.iterations = it;
  result.converged = converged;
  return result;
}

}  // namespace qeb
