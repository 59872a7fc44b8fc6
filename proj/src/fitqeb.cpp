#include "qeb/fitqeb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace qeb {

double FitParams::log_density(double f) const {
  const double x = vars.x_of(f);
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return -a2 * x * x - a1 * x + m * std::log(x) + c;
}

// --- QEB algebra ---

QuantumErrorBars quantum_error_bars(double a2, double a1, double m, ModelVariables vars, double c) {
  const double disc = a1 * a1 + 8.0 * a2 * m;
  if (disc < 0.0) {
    std::ostringstream os;
    os << "quantum_error_bars: a1^2 + 8 a2 m = " << disc << " < 0, the model has no peak";
    throw std::domain_error(os.str());
  }
  const double root = std::sqrt(disc);
  double x0 = 0.0;
  if (a1 > 0.0)
    x0 = 2.0 * m / (a1 + root);  // same root without cancellation
  else if (a2 != 0.0)
    x0 = (-a1 + root) / (4.0 * a2);
  if (!(x0 > 0.0) || !std::isfinite(x0)) {
    std::ostringstream os;
    os << "quantum_error_bars: no positive peak position (x0 = " << x0 << ")";
    throw std::domain_error(os.str());
  }
  const double curvature = a2 + m / (2.0 * x0 * x0);
  if (!(curvature > 0.0)) throw std::domain_error("quantum_error_bars: peak has non-positive curvature");

  QuantumErrorBars q;
  q.x0 = x0;
  q.f0 = vars.f_of(x0);
  q.delta = 1.0 / std::sqrt(curvature);
  q.gamma = m * std::pow(q.delta, 4) / (6.0 * x0 * x0 * x0);
  q.y0 = -a2 * x0 * x0 - a1 * x0 + m * std::log(x0) + c;
  return q;
}

QuantumErrorBars quantum_error_bars(const FitParams& p) {
  return quantum_error_bars(p.a2, p.a1, p.m, p.vars, p.c);
}

double log_poly_n(std::int64_t n, int dim) {
  if (n < 1 || dim < 1) throw std::invalid_argument("log_poly_n: need n >= 1 and dim >= 1");
  const double d2 = static_cast<double>(dim) * dim;
  return std::log(2.0) + 0.5 * (d2 - 1.0) * std::log(static_cast<double>(n));
}

double poly_n(std::int64_t n, int dim) { return std::exp(log_poly_n(n, dim)); }

// --- fit ---

namespace {

struct FitPoint {
  double x, y, sigma;
};

using Vec4 = Eigen::Vector4d;

// theta = (a2, a1, u, c), m = u^2
double model(const Vec4& t, double x) { return -t(0) * x * x - t(1) * x + t(2) * t(2) * std::log(x) + t(3); }

void residuals_and_jacobian(const Vec4& t, const std::vector<FitPoint>& pts, Eigen::VectorXd& r,
                            Eigen::MatrixXd& j) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  r.resize(n);
  j.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    const double lx = std::log(p.x);
    r(i) = (p.y - model(t, p.x)) / p.sigma;
    // d r / d theta = -(d model / d theta) / sigma
    j(i, 0) = p.x * p.x / p.sigma;
    j(i, 1) = p.x / p.sigma;
    j(i, 2) = -2.0 * t(2) * lx / p.sigma;
    j(i, 3) = -1.0 / p.sigma;
  }
}

// Invert the QEB map from the empirical peak: position, width at relative height 1/e,
// and displacement of the sides (gamma ~ side midpoint - peak).
Vec4 initial_guess(const std::vector<FitPoint>& pts) {
  std::vector<FitPoint> s = pts;
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  const auto peak = std::max_element(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.y < b.y; });
  const auto ip = static_cast<std::size_t>(peak - s.begin());
  const double x0 = peak->x;
  const double level = peak->y - 1.0;

  auto crossing = [&](int dir) {
    std::size_t i = ip;
    while (true) {
      if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == s.size())) return s[i].x;
      const std::size_t j = dir < 0 ? i - 1 : i + 1;
      if (s[j].y < level) {
        const double t = (s[i].y - level) / (s[i].y - s[j].y);
        return s[i].x + t * (s[j].x - s[i].x);
      }
      i = j;
    }
  };
  const double xl = crossing(-1);
  const double xr = crossing(+1);
  double delta = 0.5 * (xr - xl);
  if (!(delta > 0.0)) delta = 0.25 * (s.back().x - s.front().x);
  const double gamma = 0.5 * (xl + xr) - x0;

  double m = 6.0 * gamma * x0 * x0 * x0 / std::pow(delta, 4);
  m = std::clamp(m, 0.1, 1e6);
  const double a = 1.0 / (delta * delta);
  const double a2 = a - m / (2.0 * x0 * x0);
  const double a1 = 2.0 * m / x0 - 2.0 * a * x0;
  const double c = peak->y + a2 * x0 * x0 + a1 * x0 - m * std::log(x0);
  return {a2, a1, std::sqrt(m), c};
}

}  // namespace

FitParams fit_log_model(const FomHistogram& hist, ModelVariables vars, const FitOptions& options) {
  std::vector<FitPoint> pts;
  for (int i = 0; i < hist.spec.num_bins; ++i) {
    const double mu = hist.density[static_cast<std::size_t>(i)];
    const double err = hist.error[static_cast<std::size_t>(i)];
    if (!(mu > 0.0) || !(err > 0.0) || err / mu > options.max_relative_error) continue;
    const double f = hist.spec.bin_center(i);
    const double x = vars.x_of(f);
    if (!(x > 0.0)) {
      std::ostringstream os;
      os << "fit_log_model: bin " << i << " (f = " << f << ") has x = s (f - h) = " << x
         << " <= 0; check h and s for this figure of merit";
      throw FitError(os.str());
    }
    pts.push_back({x, std::log(mu), err / mu});
  }
  if (static_cast<int>(pts.size()) < options.min_points) {
    std::ostringstream os;
    os << "fit_log_model: only " << pts.size() << " usable bins, need " << options.min_points;
    throw FitError(os.str());
  }

  Vec4 theta = initial_guess(pts);
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  residuals_and_jacobian(theta, pts, r, j);
  double chi2 = r.squaredNorm();
  double mu = 1e-3;
  int it = 0;
  bool converged = false;
  int stalls = 0;

  for (; it < options.max_iterations; ++it) {
    // damped step from the augmented system [J; sqrt(mu) D] delta = -[r; 0]
    const Eigen::Vector4d diag = j.colwise().squaredNorm().transpose().cwiseMax(1e-300);
    const auto n = j.rows();
    Eigen::MatrixXd aug(n + 4, 4);
    aug.topRows(n) = j;
    aug.bottomRows(4) = (mu * diag).cwiseSqrt().asDiagonal();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 4);
    rhs.head(n) = -r;
    const Vec4 step = aug.colPivHouseholderQr().solve(rhs);

    const Vec4 trial = theta + step;
    Eigen::VectorXd r_new;
    Eigen::MatrixXd j_new;
    residuals_and_jacobian(trial, pts, r_new, j_new);
    const double chi2_new = r_new.squaredNorm();

    if (std::isfinite(chi2_new) && chi2_new <= chi2) {
      const double gain = chi2 - chi2_new;
      theta = trial;
      r = std::move(r_new);
      j = std::move(j_new);
      chi2 = chi2_new;
      mu = std::max(mu / 10.0, 1e-15);
      const bool small_step = step.cwiseAbs().maxCoeff() <= 1e-13 * (theta.cwiseAbs().maxCoeff() + 1e-13);
      const bool small_gain = gain <= 1e-15 * (chi2 + 1e-300);
      stalls = small_gain ? stalls + 1 : 0;
      if (small_step || stalls >= 3 || chi2 == 0.0) {
        converged = true;
        break;
      }
    } else {
      mu *= 10.0;
      if (mu > 1e16) {
        converged = true;  // no further decrease possible at this precision
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "fit_log_model: no convergence after " << options.max_iterations << " iterations";
    throw FitError(os.str());
  }

  FitParams p;
  p.a2 = theta(0);
  p.a1 = theta(1);
  p.m = theta(2) * theta(2);
  p.c = theta(3);
  p.vars = vars;
  p.chi2 = chi2;
  p.points_used = static_cast<int>(pts.size());
  p.dof = p.points_used - 4;
  p.reduced_chi2 = p.dof > 0 ? chi2 / p.dof : 0.0;
  p.iterations = it + 1;
  p.m_at_bound = p.m < 1e-8;

  // Bounds in (a2, a1, m, c). The model is linear in these, so the Jacobian is exact;
  // the covariance is scaled by the reduced chi-square.
  if (p.dof > 0) {
    Eigen::MatrixXd jl(static_cast<Eigen::Index>(pts.size()), 4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& q = pts[i];
      jl.row(static_cast<Eigen::Index>(i)) << -q.x * q.x / q.sigma, -q.x / q.sigma, std::log(q.x) / q.sigma,
          1.0 / q.sigma;
    }
    const Eigen::Matrix4d cov = (jl.transpose() * jl).ldlt().solve(Eigen::Matrix4d::Identity()) * p.reduced_chi2;
    const double t = boost::math::quantile(boost::math::students_t(p.dof), 0.975);
    const std::array<double, 4> values{p.a2, p.a1, p.m, p.c};
    for (int k = 0; k < 4; ++k) {
      const double half = t * std::sqrt(std::max(0.0, cov(k, k)));
      p.bounds95[static_cast<std::size_t>(k)] = {values[static_cast<std::size_t>(k)] - half,
                                                 values[static_cast<std::size_t>(k)] + half};
    }
  }
  return p;
}

}  // namespace qeb
