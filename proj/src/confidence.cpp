#include "qeb/fitqeb.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qeb {

namespace {

TailDirection natural_region(FomKind kind, ModelVariables vars) {
  switch (kind) {
    case FomKind::Fidelity2ToPure: return TailDirection::AtLeast;
    case FomKind::TraceDistance:
    case FomKind::PurifiedDistance: return TailDirection::AtMost;
    case FomKind::Observable:
      // towards the extremum: a maximum (s = -1) means large values are good
      return vars.s < 0 ? TailDirection::AtLeast : TailDirection::AtMost;
    case FomKind::Purity: break;
  }
  throw std::invalid_argument("confidence_threshold: no confidence region rule for this figure of merit");
}

// shift of the threshold that covers the delta-enlargement in purified distance
double enlargement_shift(FomKind kind, TailDirection region, const ConfidenceSettings& s) {
  switch (kind) {
    case FomKind::Fidelity2ToPure: return -s.delta;
    case FomKind::TraceDistance:
    case FomKind::PurifiedDistance: return +s.delta;
    case FomKind::Observable:
      if (!s.w) throw std::invalid_argument("confidence_threshold: observable figure of merit needs the spectral width w");
      return region == TailDirection::AtLeast ? -*s.w * s.delta : *s.w * s.delta;
    case FomKind::Purity: break;
  }
  throw std::invalid_argument("confidence_threshold: no enlargement rule for this figure of merit");
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::string describe(FomKind kind, TailDirection region, double f) {
  const std::string name(to_string(kind));
  switch (kind) {
    case FomKind::Fidelity2ToPure:
      if (region == TailDirection::AtLeast) return name + " in [" + format_number(std::max(0.0, f)) + ", 1]";
      break;
    case FomKind::TraceDistance:
    case FomKind::PurifiedDistance:
      if (region == TailDirection::AtMost) return name + " in [0, " + format_number(std::min(1.0, f)) + "]";
      break;
    default: break;
  }
  return name + (region == TailDirection::AtLeast ? " >= " : " <= ") + format_number(f);
}

ConfidenceReport base_report(FomKind kind, ModelVariables vars, const ConfidenceSettings& s) {
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0))
    throw std::invalid_argument("confidence_threshold: epsilon must lie in (0, 1)");
  if (s.delta < 0.0) throw std::invalid_argument("confidence_threshold: delta must be non-negative");
  ConfidenceReport r;
  r.epsilon = s.epsilon;
  r.n = s.n;
  r.dim = s.dim;
  r.log_poly_n = log_poly_n(s.n, s.dim);
  r.poly_n = std::exp(r.log_poly_n);
  r.log_epsilon_reduced = std::log(s.epsilon) - r.log_poly_n;
  r.epsilon_reduced = std::exp(r.log_epsilon_reduced);
  r.region = s.region.value_or(natural_region(kind, vars));
  r.delta_enlargement = s.delta;
  r.shift = enlargement_shift(kind, r.region, s) + 0.0;
  return r;
}

void finish_report(ConfidenceReport& r, FomKind kind) {
  r.f_reported = r.f_star + r.shift;
  r.description = describe(kind, r.region, r.f_reported);
}

// Log-space masses of exp(y(x) - y0) for the concave log-model y on x > 0.
class ModelMass {
 public:
  explicit ModelMass(const FitParams& p) : p_(p) {
    if (!(p.a2 > 0.0))
      throw std::domain_error("confidence_threshold: fitted a2 = " + format_number(p.a2) +
                              " <= 0, the model mass is not normalizable");
    const auto q = quantum_error_bars(p);
    x0_ = q.x0;
    scale_ = q.delta;
    y0_ = q.y0 - p.c;
    log_total_ = std::log(upper(x0_) + lower(x0_));
  }

  double x0() const { return x0_; }
  double scale() const { return scale_; }

  // ln of the fraction of mass above x
  double log_upper_fraction(double x) const {
    const double gx = g(x);
    return gx + std::log(upper_rel(x)) - log_total_;
  }

  // ln of the fraction of mass below x
  double log_lower_fraction(double x) const {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    const double gx = g(x);
    return gx + std::log(lower_rel(x)) - log_total_;
  }

 private:
  double y(double x) const { return -p_.a2 * x * x - p_.a1 * x + p_.m * std::log(x); }
  double g(double x) const { return y(x) - y0_; }

  // integral of exp(g) over [x, inf) relative to exp(g(x))
  double upper_rel(double x) const {
    const double gx = g(x);
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double t) {
      const double v = std::exp(g(x + scale_ * t) - gx);
      return std::isfinite(v) ? v : 0.0;
    };
    return scale_ * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
  }

  // integral of exp(g) over (0, x] relative to exp(g(x))
  double lower_rel(double x) const {
    const double gx = g(x);
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double v = std::exp(g(u) - gx);
      return std::isfinite(v) ? v : 0.0;
    };
    return integrator.integrate(f, 0.0, x);
  }

  double upper(double x) const { return std::exp(g(x)) * upper_rel(x); }
  double lower(double x) const { return std::exp(g(x)) * lower_rel(x); }

  const FitParams& p_;
  double x0_, scale_, y0_, log_total_;
};

}  // namespace

ConfidenceReport confidence_threshold(const FitParams& fit, FomKind kind, const ConfidenceSettings& settings) {
  ConfidenceReport r = base_report(kind, fit.vars, settings);
  r.source = "model";
  const ModelMass mass(fit);
  const double target = r.log_epsilon_reduced;

  // region in x is "x <= x*" (exclude the upper tail) or "x >= x*" (exclude the lower part)
  const bool region_below = (r.region == TailDirection::AtLeast) == (fit.vars.s < 0);
  auto excluded = [&](double x) {
    return region_below ? mass.log_upper_fraction(x) : mass.log_lower_fraction(x);
  };

  // excluded(x) is decreasing in x when region_below, increasing otherwise
  double lo = 0.0, hi = 0.0;
  if (region_below) {
    lo = 0.0;
    hi = mass.x0();
    while (excluded(hi) > target) {
      lo = hi;
      hi += 2.0 * (hi - mass.x0()) + mass.scale();
    }
  } else {
    lo = 0.0;
    hi = mass.x0();
    while (excluded(hi) < target) hi += 2.0 * (hi - mass.x0()) + mass.scale();
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double e = mid > 0.0 ? excluded(mid) : (region_below ? 0.0 : -std::numeric_limits<double>::infinity());
    const bool above_target = e > target;
    if (region_below == above_target)
      lo = mid;
    else
      hi = mid;
  }
  const double x_star = 0.5 * (lo + hi);
  r.f_star = fit.vars.f_of(x_star);
  finish_report(r, kind);
  return r;
}

ConfidenceReport confidence_threshold(const FomHistogram& hist, FomKind kind, ModelVariables vars,
                                      const ConfidenceSettings& settings) {
  ConfidenceReport r = base_report(kind, vars, settings);
  r.source = "histogram";
  const double eps = r.epsilon_reduced;
  const double total = hist.total_mass();
  if (!(total > 0.0)) throw std::invalid_argument("confidence_threshold: empty histogram");

  // excluded mass as a function of f: the side opposite to the region
  const TailDirection excluded_side =
      r.region == TailDirection::AtLeast ? TailDirection::AtMost : TailDirection::AtLeast;
  auto excluded = [&](double f) { return tail_weight(hist, f, excluded_side) / total; };

  double lo = hist.spec.f_min, hi = hist.spec.f_max;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool too_much = excluded(mid) > eps;
    if ((excluded_side == TailDirection::AtMost) == too_much)
      hi = mid;
    else
      lo = mid;
  }
  r.f_star = 0.5 * (lo + hi);
  const double w = hist.spec.bin_width();
  r.saturated = excluded_side == TailDirection::AtMost ? r.f_star < hist.spec.f_min + w
                                                       : r.f_star > hist.spec.f_max - w;
  finish_report(r, kind);
  return r;
}

}  // namespace qeb
