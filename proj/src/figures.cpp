#include "qeb/figures.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace qeb {

namespace {

void require_dim(int expected, int got) {
  if (expected != got) {
    std::ostringstream os;
    os << "figure of merit expects dimension " << expected << ", got " << got;
    throw std::invalid_argument(os.str());
  }
}

double sum_abs_eigenvalues(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

// F = tr sqrt(sqrt(sigma) rho sqrt(sigma)), given sqrt(sigma).
double root_fidelity(const CMatrix& rho, const CMatrix& sigma_sqrt) {
  const CMatrix inner = sigma_sqrt * rho * sigma_sqrt;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace

std::string_view to_string(FomKind kind) {
  switch (kind) {
    case FomKind::Fidelity2ToPure: return "fidelity2";
    case FomKind::TraceDistance: return "trace-dist";
    case FomKind::PurifiedDistance: return "purified-dist";
    case FomKind::Observable: return "observable";
    case FomKind::Purity: return "purity";
  }
  return "unknown";
}

FomKind parse_fom_kind(std::string_view name) {
  for (auto k : {FomKind::Fidelity2ToPure, FomKind::TraceDistance, FomKind::PurifiedDistance,
                 FomKind::Observable, FomKind::Purity})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown figure of merit '" + std::string(name) + "'");
}

FigureOfMerit FigureOfMerit::fidelity2_to_pure(PureState psi) {
  return FigureOfMerit(FomKind::Fidelity2ToPure, psi.dim(), psi.projector());
}

FigureOfMerit FigureOfMerit::trace_distance_to(DensityMatrix ref) {
  return FigureOfMerit(FomKind::TraceDistance, ref.dim(), ref.matrix());
}

FigureOfMerit FigureOfMerit::purified_distance_to(DensityMatrix ref) {
  FigureOfMerit f(FomKind::PurifiedDistance, ref.dim(), ref.matrix());
  f.ref_sqrt_ = hermitian_sqrt(ref.matrix());
  return f;
}

FigureOfMerit FigureOfMerit::observable(CMatrix a, std::optional<double> extremum, Extremum direction) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw std::invalid_argument("observable: expected a non-empty square matrix");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian)
    throw std::invalid_argument("observable: matrix is not Hermitian");
  const auto d = static_cast<int>(a.rows());
  FigureOfMerit f(FomKind::Observable, d, 0.5 * (a + a.adjoint()));
  f.extremum_ = extremum;
  f.direction_ = direction;
  return f;
}

FigureOfMerit FigureOfMerit::purity(int dim) {
  return FigureOfMerit(FomKind::Purity, dim, CMatrix());
}

double FigureOfMerit::evaluate(const DensityMatrix& rho) const {
  require_dim(dim_, rho.dim());
  switch (kind_) {
    case FomKind::Fidelity2ToPure:
    case FomKind::Observable:
      return (ref_ * rho.matrix()).trace().real();
    case FomKind::TraceDistance:
      return 0.5 * sum_abs_eigenvalues(rho.matrix() - ref_);
    case FomKind::PurifiedDistance: {
      const double f = root_fidelity(rho.matrix(), ref_sqrt_);
      return std::sqrt(std::max(0.0, 1.0 - f * f));
    }
    case FomKind::Purity:
      return rho.purity();
  }
  throw std::logic_error("unhandled figure of merit");
}

std::pair<double, double> FigureOfMerit::natural_range() const {
  switch (kind_) {
    case FomKind::Observable: {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(ref_, Eigen::EigenvaluesOnly);
      return {es.eigenvalues()(0), es.eigenvalues()(dim_ - 1)};
    }
    case FomKind::Purity:
      return {1.0 / dim_, 1.0};
    default:
      return {0.0, 1.0};
  }
}

bool FigureOfMerit::fit_model_applies() const {
  return kind_ == FomKind::Fidelity2ToPure || kind_ == FomKind::TraceDistance ||
         kind_ == FomKind::Observable;
}

ModelVariables model_variables(const FigureOfMerit& fom) {
  switch (fom.kind()) {
    case FomKind::Fidelity2ToPure:
      return {1.0, -1};
    case FomKind::TraceDistance:
    case FomKind::PurifiedDistance:
      return {0.0, +1};
    case FomKind::Observable:
      if (!fom.extremum())
        throw std::invalid_argument("model_variables: observable figure of merit needs its extremum value a");
      return {*fom.extremum(), fom.extremum_direction() == Extremum::Max ? -1 : +1};
    case FomKind::Purity:
      break;
  }
  throw std::invalid_argument("model_variables: no fit model for figure of merit '" +
                              std::string(to_string(fom.kind())) + "'");
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_dim(rho.dim(), sigma.dim());
  return 0.5 * sum_abs_eigenvalues(rho.matrix() - sigma.matrix());
}

double fidelity_squared(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_dim(rho.dim(), sigma.dim());
  const double f = root_fidelity(rho.matrix(), hermitian_sqrt(sigma.matrix()));
  return std::min(1.0, f * f);
}

double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return std::sqrt(std::max(0.0, 1.0 - fidelity_squared(rho, sigma)));
}

}  // namespace qeb
