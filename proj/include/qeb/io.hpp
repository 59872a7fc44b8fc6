#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qeb/figures.hpp"
#include "qeb/fitqeb.hpp"
#include "qeb/histstats.hpp"
#include "qeb/sampler.hpp"
#include "qeb/tomodata.hpp"

namespace qeb::io {

using nlohmann::json;

/// Malformed input; `field` is a JSON-pointer-like location of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

json read_json(const std::filesystem::path& path);
/// Pretty-printed, trailing newline. Doubles are written in shortest round-trip form.
void write_json(const std::filesystem::path& path, const json& j);

/// {"re": [[...], ...], "im": [[...], ...]}, rows outermost. "im" may be omitted.
json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j, const std::string& field);

/// Dataset schema:
///   {"dim": d, "effects": [{"re": ..., "im": ...}, ...], "counts": [n_0, ...],
///    "total": n (optional), "design": {"settings": [[k, ...], ...], "shots_per_setting": s} (optional)}
json dataset_to_json(const TomographyDataset& data);
TomographyDataset dataset_from_json(const json& j);
TomographyDataset parse_dataset(const std::filesystem::path& path);

/// Density matrix {"re", "im"} or pure state {"amplitudes": {"re": [...], "im": [...]}}.
DensityMatrix state_from_json(const json& j);
/// Pure state {"amplitudes": ...}; a rank-one density matrix is accepted as well.
PureState pure_state_from_json(const json& j);
json state_to_json(const DensityMatrix& rho);

/// {"q0": [...], "q1": [...], "rotations": [{"re", "im"}, ...]}
CalibrationReadout calibration_from_json(const json& j);

/// CSV with header bin_center,density,error; 17 significant digits.
void write_histogram_csv(std::ostream& os, const FomHistogram& h);
/// Reconstructs the spec from evenly spaced bin centers.
FomHistogram read_histogram_csv(std::istream& is);
json histogram_to_json(const FomHistogram& h);

json fit_to_json(const FitParams& p);
FitParams fit_from_json(const json& j);
json qeb_to_json(const QuantumErrorBars& q);
json confidence_to_json(const ConfidenceReport& r);
json walk_config_to_json(const WalkConfig& c);

}  // namespace qeb::io
