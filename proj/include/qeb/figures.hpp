#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "qeb/statespace.hpp"

namespace qeb {

enum class FomKind {
  Fidelity2ToPure,   // <psi|rho|psi>
  TraceDistance,     // (1/2) ||rho - rho_ref||_1
  PurifiedDistance,  // sqrt(1 - F^2(rho, rho_ref))
  Observable,        // tr(A rho)
  Purity,            // tr(rho^2); diagnostic only, has no fit model
};

/// Which end of the observable's range the extremum `a` sits at.
enum class Extremum { Max, Min };

std::string_view to_string(FomKind kind);
/// Accepts the CLI spellings: fidelity2, trace-dist, purified-dist, observable, purity.
FomKind parse_fom_kind(std::string_view name);

/// Offset h and sign s of the fit-model variable x = s (f - h).
struct ModelVariables {
  double h = 0.0;
  int s = 1;

  double x_of(double f) const { return s * (f - h); }
  double f_of(double x) const { return h + s * x; }
};

class FigureOfMerit {
 public:
  static FigureOfMerit fidelity2_to_pure(PureState psi);
  static FigureOfMerit trace_distance_to(DensityMatrix ref);
  static FigureOfMerit purified_distance_to(DensityMatrix ref);
  /// `extremum` is the value `a` used by the fit model; optional for histogram-only runs.
  static FigureOfMerit observable(CMatrix a, std::optional<double> extremum = std::nullopt,
                                  Extremum direction = Extremum::Max);
  static FigureOfMerit purity(int dim);

  FomKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const CMatrix& reference() const { return ref_; }
  std::optional<double> extremum() const { return extremum_; }
  Extremum extremum_direction() const { return direction_; }

  /// Throws std::invalid_argument on a dimension mismatch.
  double evaluate(const DensityMatrix& rho) const;

  /// Range of values the figure can take over all states: [0,1] for fidelities and
  /// distances, the spectral range for observables.
  std::pair<double, double> natural_range() const;

  /// False for figures that do not satisfy the affine ansatz behind the fit model
  /// in general (purified distance, purity).
  bool fit_model_applies() const;

 private:
  FigureOfMerit(FomKind kind, int dim, CMatrix ref) : kind_(kind), dim_(dim), ref_(std::move(ref)) {}

  FomKind kind_;
  int dim_;
  CMatrix ref_;  // |psi><psi|, rho_ref, or the observable
  CMatrix ref_sqrt_;
  std::optional<double> extremum_;
  Extremum direction_ = Extremum::Max;
};

inline double evaluate(const FigureOfMerit& fom, const DensityMatrix& rho) { return fom.evaluate(rho); }

/// Table of (h, s): fidelity^2 -> (1, -1); trace/purified distance -> (0, +1);
/// observable with extremum a -> (a, -1) for a maximum, (a, +1) for a minimum.
/// Throws std::invalid_argument for an observable without extremum, or for purity.
ModelVariables model_variables(const FigureOfMerit& fom);

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Squared (root) fidelity F^2 = (tr |sqrt(rho) sqrt(sigma)|)^2.
double fidelity_squared(const DensityMatrix& rho, const DensityMatrix& sigma);
double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qeb
