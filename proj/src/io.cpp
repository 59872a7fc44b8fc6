#include "qeb/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qeb::io {

namespace {

const json& require(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object()) throw FormatError(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(field + "/" + key, "missing required field");
  return *it;
}

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) throw FormatError(field, "expected a number");
  return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& field) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
  }
  throw FormatError(field, "expected an integer");
}

std::vector<double> real_array(const json& j, const std::string& field) {
  if (!j.is_array()) throw FormatError(field, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], field + "/" + std::to_string(i)));
  return out;
}

Eigen::MatrixXd real_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw FormatError(field, "expected a non-empty 2-D array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rf = field + "/" + std::to_string(r);
    const auto row = real_array(j[static_cast<std::size_t>(r)], rf);
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(rf, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

CVector vector_from_json(const json& j, const std::string& field) {
  const auto re = real_array(require(j, "re", field), field + "/re");
  std::vector<double> im(re.size(), 0.0);
  if (j.contains("im")) im = real_array(j["im"], field + "/im");
  if (im.size() != re.size())
    throw FormatError(field, "re has " + std::to_string(re.size()) + " entries but im has " +
                                 std::to_string(im.size()));
  CVector v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
  return v;
}

json rows_of(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

template <typename F>
auto with_field(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(field, e.what());
  }
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string(), e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string(), "cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) throw FormatError(path.string(), "write failed");
}

json matrix_to_json(const CMatrix& m) { return {{"re", rows_of(m.real())}, {"im", rows_of(m.imag())}}; }

CMatrix matrix_from_json(const json& j, const std::string& field) {
  const Eigen::MatrixXd re = real_matrix(require(j, "re", field), field + "/re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = real_matrix(j["im"], field + "/im");
  if (im.rows() != re.rows() || im.cols() != re.cols())
    throw FormatError(field, "re is " + std::to_string(re.rows()) + "x" + std::to_string(re.cols()) + " but im is " +
                                 std::to_string(im.rows()) + "x" + std::to_string(im.cols()));
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

// --- datasets ---

json dataset_to_json(const TomographyDataset& data) {
  json j;
  j["dim"] = data.dim();
  json effects = json::array();
  for (const auto& e : data.effects()) effects.push_back(matrix_to_json(e.matrix()));
  j["effects"] = std::move(effects);
  j["counts"] = data.counts();
  j["total"] = data.total();
  if (const auto& d = data.design()) {
    j["design"] = {{"settings", d->settings}, {"shots_per_setting", d->shots_per_setting}};
  }
  return j;
}

TomographyDataset dataset_from_json(const json& j) {
  const std::string root;
  const auto dim = as_int(require(j, "dim", root), "/dim");
  if (dim < 1) throw FormatError("/dim", "must be a positive integer");

  const json& ej = require(j, "effects", root);
  if (!ej.is_array()) throw FormatError("/effects", "expected an array");
  const json& cj = require(j, "counts", root);
  if (!cj.is_array()) throw FormatError("/counts", "expected an array");
  if (ej.size() != cj.size())
    throw FormatError("/counts", "counts has " + std::to_string(cj.size()) + " entries but effects has " +
                                     std::to_string(ej.size()));

  std::vector<PovmEffect> effects;
  effects.reserve(ej.size());
  for (std::size_t k = 0; k < ej.size(); ++k) {
    const std::string f = "/effects/" + std::to_string(k);
    CMatrix m = matrix_from_json(ej[k], f);
    if (m.rows() != dim || m.cols() != dim)
      throw FormatError(f, "effect " + std::to_string(k) + " is " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()) + ", expected " + std::to_string(dim) + "x" +
                               std::to_string(dim));
    effects.push_back(with_field(f, [&] {
      try {
        return PovmEffect(std::move(m));
      } catch (const std::exception& e) {
        throw std::invalid_argument("effect " + std::to_string(k) + ": " + e.what());
      }
    }));
  }

  std::vector<std::int64_t> counts;
  counts.reserve(cj.size());
  for (std::size_t k = 0; k < cj.size(); ++k) {
    const std::string f = "/counts/" + std::to_string(k);
    const auto n = as_int(cj[k], f);
    if (n < 0) throw FormatError(f, "count of effect " + std::to_string(k) + " is negative");
    counts.push_back(n);
  }

  std::optional<std::int64_t> total;
  if (j.contains("total")) total = as_int(j["total"], "/total");

  std::optional<ExperimentDesign> design;
  if (j.contains("design")) {
    const json& dj = j["design"];
    ExperimentDesign d;
    d.shots_per_setting = as_int(require(dj, "shots_per_setting", "/design"), "/design/shots_per_setting");
    const json& sj = require(dj, "settings", "/design");
    if (!sj.is_array()) throw FormatError("/design/settings", "expected an array");
    for (std::size_t s = 0; s < sj.size(); ++s) {
      const std::string f = "/design/settings/" + std::to_string(s);
      if (!sj[s].is_array()) throw FormatError(f, "expected an array of effect indices");
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < sj[s].size(); ++i) {
        const auto v = as_int(sj[s][i], f + "/" + std::to_string(i));
        if (v < 0 || static_cast<std::size_t>(v) >= effects.size())
          throw FormatError(f + "/" + std::to_string(i), "effect index " + std::to_string(v) + " out of range");
        idx.push_back(static_cast<std::size_t>(v));
      }
      d.settings.push_back(std::move(idx));
    }
    design = std::move(d);
  }

  return with_field(root.empty() ? "/" : root, [&] {
    return TomographyDataset(static_cast<int>(dim), std::move(effects), std::move(counts), total, std::move(design));
  });
}

TomographyDataset parse_dataset(const std::filesystem::path& path) {
  const json j = read_json(path);
  try {
    return dataset_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ":" + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
}

// --- states, observables, calibration ---

DensityMatrix state_from_json(const json& j) {
  if (j.is_object() && j.contains("amplitudes")) return DensityMatrix::from_pure(pure_state_from_json(j));
  CMatrix m = matrix_from_json(j, "");
  return with_field("/", [&] { return DensityMatrix(std::move(m)); });
}

PureState pure_state_from_json(const json& j) {
  if (j.is_object() && j.contains("amplitudes")) {
    CVector v = vector_from_json(j["amplitudes"], "/amplitudes");
    return with_field("/amplitudes", [&] { return PureState::normalized(std::move(v)); });
  }
  const DensityMatrix rho = state_from_json(j);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  const Eigen::Index top = rho.dim() - 1;
  if (std::abs(es.eigenvalues()(top) - 1.0) > 1e-9)
    throw FormatError("/", "reference is not a pure state (largest eigenvalue " +
                               std::to_string(es.eigenvalues()(top)) + ")");
  return PureState::normalized(es.eigenvectors().col(top));
}

json state_to_json(const DensityMatrix& rho) {
  json j = matrix_to_json(rho.matrix());
  j["dim"] = rho.dim();
  const RVector ev = rho.eigenvalues();
  j["eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
  return j;
}

CalibrationReadout calibration_from_json(const json& j) {
  CalibrationReadout cal;
  cal.q0 = real_array(require(j, "q0", ""), "/q0");
  cal.q1 = real_array(require(j, "q1", ""), "/q1");
  const json& rj = require(j, "rotations", "");
  if (!rj.is_array()) throw FormatError("/rotations", "expected an array");
  for (std::size_t i = 0; i < rj.size(); ++i) cal.rotations.push_back(matrix_from_json(rj[i], "/rotations/" + std::to_string(i)));
  with_field("/", [&] {
    cal.validate();
    return 0;
  });
  return cal;
}

// --- histograms ---

void write_histogram_csv(std::ostream& os, const FomHistogram& h) {
  const auto old = os.precision(17);
  os << "bin_center,density,error\n";
  for (int i = 0; i < h.spec.num_bins; ++i)
    os << h.spec.bin_center(i) << ',' << h.density[static_cast<std::size_t>(i)] << ','
       << h.error[static_cast<std::size_t>(i)] << '\n';
  os.precision(old);
}

FomHistogram read_histogram_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("line 1", "empty histogram file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bin_center,density,error") throw FormatError("line 1", "expected header bin_center,density,error");

  std::vector<double> centers, density, error;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw FormatError("line " + std::to_string(lineno), "expected three comma-separated values");
    try {
      centers.push_back(std::stod(a));
      density.push_back(std::stod(b));
      error.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(lineno), "cannot parse number");
    }
  }
  if (centers.size() < 2) throw FormatError("line " + std::to_string(lineno), "need at least two bins");

  const auto n = static_cast<int>(centers.size());
  const double w = (centers.back() - centers.front()) / (n - 1);
  if (!(w > 0.0)) throw FormatError("line 2", "bin centers must increase");
  for (int i = 1; i < n; ++i) {
    const double step = centers[static_cast<std::size_t>(i)] - centers[static_cast<std::size_t>(i) - 1];
    if (std::abs(step - w) > 1e-6 * w)
      throw FormatError("line " + std::to_string(i + 2), "bin centers are not evenly spaced");
  }
  FomHistogram h;
  h.spec = {centers.front() - 0.5 * w, centers.back() + 0.5 * w, n};
  h.density = std::move(density);
  h.error = std::move(error);
  return h;
}

json histogram_to_json(const FomHistogram& h) {
  json bins = json::array();
  for (int i = 0; i < h.spec.num_bins; ++i)
    bins.push_back({{"bin_center", h.spec.bin_center(i)},
                    {"density", h.density[static_cast<std::size_t>(i)]},
                    {"error", h.error[static_cast<std::size_t>(i)]}});
  return {{"f_min", h.spec.f_min},
          {"f_max", h.spec.f_max},
          {"num_bins", h.spec.num_bins},
          {"samples", h.samples},
          {"off_range", h.off_range_count},
          {"bins", std::move(bins)}};
}

// --- fit and reports ---

json fit_to_json(const FitParams& p) {
  json bounds;
  const char* names[4] = {"a2", "a1", "m", "c"};
  for (std::size_t k = 0; k < 4; ++k) bounds[names[k]] = {p.bounds95[k][0], p.bounds95[k][1]};
  return {{"a2", p.a2},
          {"a1", p.a1},
          {"m", p.m},
          {"c", p.c},
          {"h", p.vars.h},
          {"s", p.vars.s},
          {"bounds95", std::move(bounds)},
          {"chi2", p.chi2},
          {"reduced_chi2", p.reduced_chi2},
          {"points_used", p.points_used},
          {"dof", p.dof},
          {"iterations", p.iterations},
          {"m_at_bound", p.m_at_bound}};
}

FitParams fit_from_json(const json& j) {
  const json& src = j.is_object() && j.contains("fit") ? j["fit"] : j;
  FitParams p;
  p.a2 = as_double(require(src, "a2", ""), "/a2");
  p.a1 = as_double(require(src, "a1", ""), "/a1");
  p.m = as_double(require(src, "m", ""), "/m");
  if (src.contains("c")) p.c = as_double(src["c"], "/c");
  p.vars.h = as_double(require(src, "h", ""), "/h");
  const auto s = as_int(require(src, "s", ""), "/s");
  if (s != 1 && s != -1) throw FormatError("/s", "must be +1 or -1");
  p.vars.s = static_cast<int>(s);
  if (src.contains("reduced_chi2")) p.reduced_chi2 = as_double(src["reduced_chi2"], "/reduced_chi2");
  if (src.contains("chi2")) p.chi2 = as_double(src["chi2"], "/chi2");
  if (src.contains("points_used")) p.points_used = static_cast<int>(as_int(src["points_used"], "/points_used"));
  if (src.contains("dof")) p.dof = static_cast<int>(as_int(src["dof"], "/dof"));
  if (src.contains("bounds95")) {
    const char* names[4] = {"a2", "a1", "m", "c"};
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string f = std::string("/bounds95/") + names[k];
      const auto b = real_array(require(src["bounds95"], names[k], "/bounds95"), f);
      if (b.size() != 2) throw FormatError(f, "expected [lower, upper]");
      p.bounds95[k] = {b[0], b[1]};
    }
  }
  p.m_at_bound = p.m < 1e-8;
  return p;
}

json qeb_to_json(const QuantumErrorBars& q) {
  return {{"f0", q.f0}, {"delta", q.delta}, {"gamma", q.gamma}, {"x0", q.x0}, {"y0", q.y0}};
}

json confidence_to_json(const ConfidenceReport& r) {
  return {{"epsilon", r.epsilon},
          {"n", r.n},
          {"dim", r.dim},
          {"log_poly_n", r.log_poly_n},
          {"poly_n", r.poly_n},
          {"log_epsilon_reduced", r.log_epsilon_reduced},
          {"epsilon_reduced", r.epsilon_reduced},
          {"region", r.region == TailDirection::AtLeast ? "at_least" : "at_most"},
          {"f_star", r.f_star},
          {"delta", r.delta_enlargement},
          {"shift", r.shift},
          {"f_reported", r.f_reported},
          {"saturated", r.saturated},
          {"source", r.source},
          {"description", r.description}};
}

json walk_config_to_json(const WalkConfig& c) {
  return {{"step_size", c.step_size},
          {"n_therm", c.n_therm},
          {"n_sweep", c.n_sweep},
          {"n_samples", c.n_samples},
          {"n_walkers", c.n_walkers},
          {"base_seed", c.base_seed},
          {"auto_tune", c.auto_tune},
          {"target_acceptance", c.target_acceptance}};
}

}  // namespace qeb::io
