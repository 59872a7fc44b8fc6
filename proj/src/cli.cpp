#include "qeb/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qeb/fitqeb.hpp"
#include "qeb/io.hpp"
#include "qeb/mle.hpp"
#include "qeb/sampler.hpp"

namespace qeb::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FomOptions {
  std::string kind = "fidelity2";
  std::string ref;
  bool ref_mle = false;
  std::string observable;
  std::optional<double> extremum;
  std::string extremum_dir = "max";
};

void add_fom_options(CLI::App* app, FomOptions& o) {
  app->add_option("--fom", o.kind, "fidelity2 | trace-dist | purified-dist | observable | purity")
      ->capture_default_str();
  app->add_option("--ref", o.ref, "reference state file (pure state for fidelity2)");
  app->add_flag("--ref-mle", o.ref_mle, "use the maximum-likelihood estimate as the reference state");
  app->add_option("--observable", o.observable, "observable matrix file {re, im}");
  app->add_option("--extremum", o.extremum, "extremum a of the observable used by the fit model");
  app->add_option("--extremum-dir", o.extremum_dir, "max | min")->capture_default_str();
}

Extremum parse_extremum_dir(const std::string& s) {
  if (s == "max") return Extremum::Max;
  if (s == "min") return Extremum::Min;
  throw UsageError("--extremum-dir must be max or min, got '" + s + "'");
}

void check_dim(int expected, int got, const std::string& what) {
  if (expected != got)
    throw std::invalid_argument("inconsistent dimensions: dataset has d = " + std::to_string(expected) + " but " +
                                what + " has d = " + std::to_string(got));
}

struct BuiltFom {
  FigureOfMerit fom;
  std::optional<MleResult> mle_ref;
};

BuiltFom build_fom(const FomOptions& o, const TomographyDataset& data) {
  const FomKind kind = parse_fom_kind(o.kind);
  const int d = data.dim();
  auto reference_state = [&](std::optional<MleResult>& mle_out) {
    if (o.ref_mle && !o.ref.empty()) throw UsageError("--ref and --ref-mle are mutually exclusive");
    if (o.ref_mle) {
      mle_out = mle(data);
      return mle_out->state;
    }
    if (o.ref.empty()) throw UsageError("--fom " + o.kind + " needs --ref <file> or --ref-mle");
    auto rho = io::state_from_json(io::read_json(o.ref));
    check_dim(d, rho.dim(), "the reference state");
    return rho;
  };

  std::optional<MleResult> mle_ref;
  switch (kind) {
    case FomKind::Fidelity2ToPure: {
      if (o.ref_mle) throw UsageError("--fom fidelity2 needs a pure reference; --ref-mle is not allowed");
      if (o.ref.empty()) throw UsageError("--fom fidelity2 needs --ref <file>");
      auto psi = io::pure_state_from_json(io::read_json(o.ref));
      check_dim(d, psi.dim(), "the reference state");
      return {FigureOfMerit::fidelity2_to_pure(std::move(psi)), std::nullopt};
    }
    case FomKind::TraceDistance: {
      auto rho = reference_state(mle_ref);
      return {FigureOfMerit::trace_distance_to(std::move(rho)), std::move(mle_ref)};
    }
    case FomKind::PurifiedDistance: {
      auto rho = reference_state(mle_ref);
      return {FigureOfMerit::purified_distance_to(std::move(rho)), std::move(mle_ref)};
    }
    case FomKind::Observable: {
      if (o.observable.empty()) throw UsageError("--fom observable needs --observable <file>");
      CMatrix a = io::matrix_from_json(io::read_json(o.observable), "");
      check_dim(d, static_cast<int>(a.rows()), "the observable");
      return {FigureOfMerit::observable(std::move(a), o.extremum, parse_extremum_dir(o.extremum_dir)), std::nullopt};
    }
    case FomKind::Purity: return {FigureOfMerit::purity(d), std::nullopt};
  }
  throw UsageError("unknown figure of merit");
}

// (h, s) for post-processing commands that have no state space at hand
ModelVariables variables_for(const FomOptions& o) {
  const FomKind kind = parse_fom_kind(o.kind);
  switch (kind) {
    case FomKind::Fidelity2ToPure: return {1.0, -1};
    case FomKind::TraceDistance:
    case FomKind::PurifiedDistance: return {0.0, +1};
    case FomKind::Observable:
      if (!o.extremum) throw UsageError("--fom observable needs --extremum for the fit model");
      return {*o.extremum, parse_extremum_dir(o.extremum_dir) == Extremum::Max ? -1 : +1};
    case FomKind::Purity: break;
  }
  throw UsageError("--fom " + o.kind + " has no fit model");
}

HistogramSpec parse_range(const std::string& range, int bins) {
  const auto colon = range.find(':');
  if (colon == std::string::npos) throw UsageError("--range must be 'auto' or lo:hi, got '" + range + "'");
  HistogramSpec spec;
  try {
    std::size_t used = 0;
    const std::string lo = range.substr(0, colon), hi = range.substr(colon + 1);
    spec.f_min = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    spec.f_max = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
  } catch (const std::exception&) {
    throw UsageError("--range: cannot parse '" + range + "'");
  }
  spec.num_bins = bins;
  spec.validate();
  return spec;
}

void emit(std::ostream& out, const json& j, const std::string& path) {
  if (path.empty() || path == "-")
    out << j.dump(2) << '\n';
  else
    io::write_json(path, j);
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_gnuplot(const fs::path& path, const std::string& csv, const FigureOfMerit& fom,
                   const std::optional<FitParams>& fit) {
  std::ofstream gp(path);
  if (!gp) throw io::FormatError(path.string(), "cannot open file for writing");
  gp << "set datafile separator ','\n"
     << "set xlabel '" << to_string(fom.kind()) << "'\n"
     << "set ylabel 'mu(f)'\n";
  if (fit) {
    gp << "a2 = " << number(fit->a2) << "\n"
       << "a1 = " << number(fit->a1) << "\n"
       << "m = " << number(fit->m) << "\n"
       << "c = " << number(fit->c) << "\n"
       << "h = " << number(fit->vars.h) << "\n"
       << "s = " << fit->vars.s << "\n"
       << "x(f) = s * (f - h)\n"
       << "model(f) = x(f) > 0 ? exp(-a2 * x(f)**2 - a1 * x(f) + m * log(x(f)) + c) : 1/0\n"
       << "set samples 1000\n"
       << "plot '" << csv << "' every ::1 using 1:2:3 with yerrorbars title 'histogram', \\\n"
       << "     model(x) with lines title 'fit'\n";
  } else {
    gp << "plot '" << csv << "' every ::1 using 1:2:3 with yerrorbars title 'histogram'\n";
  }
}

json provenance(const std::vector<std::string>& args, json config, json seeds) {
  return {{"tool", kToolName},
          {"version", kVersion},
          {"command", args},
          {"config", std::move(config)},
          {"seeds", std::move(seeds)}};
}

json fom_json(const FigureOfMerit& fom, const FomOptions& o) {
  json j{{"kind", to_string(fom.kind())}};
  if (!o.ref.empty()) j["ref"] = o.ref;
  if (o.ref_mle) j["ref"] = "mle";
  if (!o.observable.empty()) j["observable"] = o.observable;
  if (fom.extremum()) {
    j["extremum"] = *fom.extremum();
    j["extremum_dir"] = o.extremum_dir;
  }
  const auto [lo, hi] = fom.natural_range();
  j["natural_range"] = {lo, hi};
  return j;
}

// --- subcommands ---

struct AnalyzeOptions {
  std::string data;
  FomOptions fom;
  int bins = 100;
  std::string range = "auto";
  std::int64_t pilot_samples = 2048;
  WalkConfig walk;
  int threads = 0;
  bool no_fit = false;
  double max_rel_error = 1.0;
  std::optional<double> epsilon;
  double delta = 0.0;
  std::optional<double> w_range;
  std::string region;
  std::string out = ".";
  bool dump_samples = false;
};

std::optional<TailDirection> parse_region(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "at-least") return TailDirection::AtLeast;
  if (s == "at-most") return TailDirection::AtMost;
  throw UsageError("--region must be at-least or at-most, got '" + s + "'");
}

void add_confidence_options(CLI::App* app, std::optional<double>& epsilon, double& delta,
                            std::optional<double>& w, std::string& region) {
  app->add_option("--epsilon", epsilon, "confidence parameter; enables the confidence report")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--delta", delta, "purified-distance enlargement of the region")->capture_default_str();
  app->add_option("--w-range", w, "spectral width w of the observable (default: from its eigenvalues)");
  app->add_option("--region", region, "at-least | at-most (default: natural side)");
}

ConfidenceSettings confidence_settings(double epsilon, double delta, std::optional<double> w,
                                       const std::string& region, std::int64_t n, int dim) {
  ConfidenceSettings s;
  s.epsilon = epsilon;
  s.delta = delta;
  s.w = w;
  s.n = n;
  s.dim = dim;
  s.region = parse_region(region);
  return s;
}

int cmd_analyze(const AnalyzeOptions& o, const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  const auto data = io::parse_dataset(o.data);
  auto built = build_fom(o.fom, data);
  const FigureOfMerit& fom = built.fom;
  json warnings = json::array();

  WalkConfig cfg = o.walk;
  cfg.keep_samples = o.dump_samples;
  cfg.validate();

  const HistogramSpec spec =
      o.range == "auto" ? auto_range(data, cfg, fom, o.bins, o.pilot_samples) : parse_range(o.range, o.bins);
  spec.validate();

  const auto result = run_analysis(data, cfg, fom, spec, o.threads);
  const FomHistogram& hist = result.combined;

  fs::create_directories(o.out);
  const fs::path dir(o.out);
  {
    std::ofstream csv(dir / "histogram.csv");
    if (!csv) throw io::FormatError((dir / "histogram.csv").string(), "cannot open file for writing");
    io::write_histogram_csv(csv, hist);
  }
  if (o.dump_samples) {
    std::ofstream s(dir / "samples.csv");
    if (!s) throw io::FormatError((dir / "samples.csv").string(), "cannot open file for writing");
    s << std::setprecision(17) << "walker,index,value\n";
    for (const auto& w : result.walkers)
      for (std::size_t i = 0; i < w.report.samples.size(); ++i)
        s << w.report.walker_index << ',' << i << ',' << w.report.samples[i] << '\n';
  }

  json walkers = json::array();
  json seeds{{"base_seed", cfg.base_seed}, {"pilot_seed", walker_seed(cfg.base_seed, -1)}};
  json walker_seeds = json::array();
  for (const auto& w : result.walkers) {
    const auto& r = w.report;
    walkers.push_back({{"index", r.walker_index},
                       {"seed", r.seed},
                       {"step_size", r.step_size},
                       {"sweep", r.sweep},
                       {"recorded", r.recorded},
                       {"steps", r.steps},
                       {"acceptance_ratio", r.acceptance_ratio},
                       {"warnings", r.warnings}});
    walker_seeds.push_back(r.seed);
    for (const auto& msg : r.warnings) warnings.push_back("walker " + std::to_string(r.walker_index) + ": " + msg);
  }
  seeds["walkers"] = std::move(walker_seeds);

  // fit and QEB
  std::optional<FitParams> fit;
  json fit_j = nullptr, qeb_j = nullptr;
  if (!o.no_fit) {
    std::optional<ModelVariables> vars;
    if (fom.kind() == FomKind::Purity) {
      warnings.push_back("purity has no fit model; fit skipped");
    } else if (fom.kind() == FomKind::Observable && !fom.extremum()) {
      warnings.push_back("observable without --extremum; fit skipped");
    } else {
      vars = model_variables(fom);
      if (!fom.fit_model_applies())
        warnings.push_back(std::string(to_string(fom.kind())) +
                           ": the fit model is only approximate for this figure of merit");
    }
    if (vars) {
      try {
        FitOptions fo;
        fo.max_relative_error = o.max_rel_error;
        fit = fit_log_model(hist, *vars, fo);
        fit_j = io::fit_to_json(*fit);
        if (fit->m_at_bound) warnings.push_back("fit: m is at its lower bound 0");
        try {
          qeb_j = io::qeb_to_json(quantum_error_bars(*fit));
        } catch (const std::domain_error& e) {
          warnings.push_back(e.what());
        }
      } catch (const FitError& e) {
        warnings.push_back(e.what());
      }
    }
  }

  json conf_j = nullptr;
  if (o.epsilon) {
    std::optional<double> w = o.w_range;
    if (fom.kind() == FomKind::Observable && !w) {
      const auto [lo, hi] = fom.natural_range();
      w = hi - lo;
    }
    const auto settings = confidence_settings(*o.epsilon, o.delta, w, o.region, data.total(), data.dim());
    if (fit && !qeb_j.is_null()) {
      try {
        conf_j = io::confidence_to_json(confidence_threshold(*fit, fom.kind(), settings));
      } catch (const std::domain_error& e) {
        warnings.push_back(std::string(e.what()) + "; using the histogram instead");
      }
    }
    if (conf_j.is_null()) {
      const ModelVariables vars = fom.kind() == FomKind::Observable && !fom.extremum()
                                      ? ModelVariables{0.0, -1}
                                      : model_variables(fom);
      const auto rep = confidence_threshold(hist, fom.kind(), vars, settings);
      if (rep.saturated) warnings.push_back("confidence: threshold saturates at the histogram edge");
      conf_j = io::confidence_to_json(rep);
    }
  }

  const fs::path gp = dir / "plot.gp";
  write_gnuplot(gp, "histogram.csv", fom, fit);

  json config{{"data", o.data},
              {"figure_of_merit", fom_json(fom, o.fom)},
              {"histogram", {{"bins", o.bins}, {"range", o.range}, {"pilot_samples", o.pilot_samples}}},
              {"walk", io::walk_config_to_json(cfg)},
              {"fit", !o.no_fit},
              {"max_rel_error", o.max_rel_error}};
  if (o.epsilon)
    config["confidence"] = {{"epsilon", *o.epsilon}, {"delta", o.delta}, {"w_range", o.w_range ? json(*o.w_range) : json(nullptr)}};

  json report{{"provenance", provenance(args, std::move(config), std::move(seeds))},
              {"dataset", {{"dim", data.dim()}, {"effects", data.size()}, {"total", data.total()}}},
              {"figure_of_merit", fom_json(fom, o.fom)},
              {"histogram", io::histogram_to_json(hist)},
              {"histogram_csv", "histogram.csv"},
              {"walkers", std::move(walkers)},
              {"fit", std::move(fit_j)},
              {"qeb", std::move(qeb_j)},
              {"confidence", std::move(conf_j)},
              {"warnings", warnings}};
  if (built.mle_ref)
    report["reference_mle"] = {{"state", io::state_to_json(built.mle_ref->state)},
                               {"log_likelihood", built.mle_ref->log_likelihood},
                               {"iterations", built.mle_ref->iterations},
                               {"converged", built.mle_ref->converged}};
  io::write_json(dir / "report.json", report);
  if (fit) io::write_json(dir / "fit.json", io::fit_to_json(*fit));

  for (const auto& w : warnings) err << "warning: " << w.get<std::string>() << '\n';
  json summary{{"report", (dir / "report.json").string()},
               {"histogram_csv", (dir / "histogram.csv").string()},
               {"qeb", report["qeb"]},
               {"confidence", report["confidence"]}};
  out << summary.dump(2) << '\n';
  return 0;
}

PureState preset_target(const std::string& name) {
  if (name == "noisy-bell") {
    CVector v = CVector::Zero(4);
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = Complex(0.0, 1.0 / std::sqrt(2.0));
    return PureState::normalized(std::move(v));
  }
  throw UsageError("unknown preset '" + name + "' (available: noisy-bell)");
}

DensityMatrix preset_state(const std::string& name) {
  // 0.95 |psi><psi| + 0.05 I/4
  const PureState psi = preset_target(name);
  CMatrix rho = 0.05 / 4.0 * CMatrix::Identity(4, 4) + 0.95 * psi.projector();
  return DensityMatrix(std::move(rho));
}

int qubits_for(int dim) {
  int n = 0;
  while ((1 << n) < dim) ++n;
  if ((1 << n) != dim) throw std::invalid_argument("simulate: dimension " + std::to_string(dim) + " is not a power of two");
  return n;
}

struct SimulateOptions {
  std::string state;
  std::string preset;
  std::string calibration;
  std::int64_t shots = 500;
  std::uint64_t seed = 0;
  std::string out;
  std::string state_out;
  std::string target_out;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  if (o.state.empty() == o.preset.empty()) throw UsageError("simulate needs exactly one of --state or --preset");
  const DensityMatrix rho = o.preset.empty() ? io::state_from_json(io::read_json(o.state)) : preset_state(o.preset);
  const int n = qubits_for(rho.dim());
  const auto settings = o.calibration.empty()
                            ? standard_pauli_settings(n)
                            : calibrated_settings(io::calibration_from_json(io::read_json(o.calibration)), n);
  Rng rng(o.seed);
  const auto data = simulate_dataset(rho, settings, o.shots, rng);
  if (!o.state_out.empty()) io::write_json(o.state_out, io::state_to_json(rho));
  if (!o.target_out.empty()) {
    if (o.preset.empty()) throw UsageError("--target-out needs --preset");
    const CVector& a = preset_target(o.preset).amplitudes();
    std::vector<double> re(static_cast<std::size_t>(a.size())), im(re.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      re[static_cast<std::size_t>(i)] = a(i).real();
      im[static_cast<std::size_t>(i)] = a(i).imag();
    }
    io::write_json(o.target_out, json{{"amplitudes", {{"re", re}, {"im", im}}}});
  }
  emit(out, io::dataset_to_json(data), o.out);
  return 0;
}

struct MleCmdOptions {
  std::string data;
  double tol = 1e-10;
  std::int64_t max_iter = 100000;
  std::string out;
};

int cmd_mle(const MleCmdOptions& o, std::ostream& out) {
  const auto data = io::parse_dataset(o.data);
  MleOptions mo;
  mo.tol = o.tol;
  mo.max_iter = o.max_iter;
  const auto r = mle(data, mo);
  emit(out,
       json{{"state", io::state_to_json(r.state)},
            {"log_likelihood", r.log_likelihood},
            {"iterations", r.iterations},
            {"converged", r.converged}},
       o.out);
  return 0;
}

FomHistogram load_histogram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::FormatError(path, "cannot open file");
  try {
    return io::read_histogram_csv(in);
  } catch (const io::FormatError& e) {
    throw io::FormatError(path + ":" + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
}

struct FitCmdOptions {
  std::string histogram;
  FomOptions fom;
  std::optional<double> h;
  std::optional<int> s;
  double max_rel_error = 1.0;
  std::string out;
};

ModelVariables variables_from(const FomOptions& fom, std::optional<double> h, std::optional<int> s) {
  if (h.has_value() != s.has_value()) throw UsageError("--h and --s must be given together");
  if (h) {
    if (*s != 1 && *s != -1) throw UsageError("--s must be +1 or -1");
    return {*h, *s};
  }
  return variables_for(fom);
}

int cmd_fit(const FitCmdOptions& o, std::ostream& out) {
  const auto hist = load_histogram(o.histogram);
  FitOptions fo;
  fo.max_relative_error = o.max_rel_error;
  const auto fit = fit_log_model(hist, variables_from(o.fom, o.h, o.s), fo);
  json j{{"fit", io::fit_to_json(fit)}};
  j["qeb"] = io::qeb_to_json(quantum_error_bars(fit));
  emit(out, j, o.out);
  return 0;
}

struct QebCmdOptions {
  std::optional<double> a2, a1, m, h;
  std::optional<int> s;
  double c = 0.0;
  std::string fit;
};

int cmd_qeb(const QebCmdOptions& o, std::ostream& out) {
  QuantumErrorBars q;
  if (!o.fit.empty()) {
    q = quantum_error_bars(io::fit_from_json(io::read_json(o.fit)));
  } else {
    if (!o.a2 || !o.a1 || !o.m || !o.h || !o.s) throw UsageError("qeb needs --a2 --a1 --m --h --s, or --fit <file>");
    if (*o.s != 1 && *o.s != -1) throw UsageError("--s must be +1 or -1");
    q = quantum_error_bars(*o.a2, *o.a1, *o.m, ModelVariables{*o.h, *o.s}, o.c);
  }
  out << io::qeb_to_json(q).dump(2) << '\n';
  return 0;
}

struct ConfidenceCmdOptions {
  std::string fit;
  std::string histogram;
  FomOptions fom;
  double epsilon = 0.05;
  double delta = 0.0;
  std::optional<double> w;
  std::string region;
  std::optional<std::int64_t> n;
  std::optional<int> dim;
  std::string data;
  std::string out;
};

int cmd_confidence(const ConfidenceCmdOptions& o, std::ostream& out) {
  if (o.fit.empty() == o.histogram.empty()) throw UsageError("confidence needs exactly one of --fit or --histogram");
  std::int64_t n = 0;
  int dim = 0;
  if (!o.data.empty()) {
    const auto data = io::parse_dataset(o.data);
    n = data.total();
    dim = data.dim();
  }
  if (o.n) n = *o.n;
  if (o.dim) dim = *o.dim;
  if (n < 1 || dim < 1) throw UsageError("confidence needs --n and --dim, or --data <file>");
  const FomKind kind = parse_fom_kind(o.fom.kind);
  const auto settings = confidence_settings(o.epsilon, o.delta, o.w, o.region, n, dim);
  ConfidenceReport r;
  if (!o.fit.empty()) {
    r = confidence_threshold(io::fit_from_json(io::read_json(o.fit)), kind, settings);
  } else {
    ModelVariables vars{0.0, -1};
    if (kind != FomKind::Observable || o.fom.extremum) vars = variables_for(o.fom);
    r = confidence_threshold(load_histogram(o.histogram), kind, vars, settings);
  }
  emit(out, io::confidence_to_json(r), o.out);
  return 0;
}

struct BootstrapCmdOptions {
  std::string data;
  FomOptions fom;
  int reps = 100;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

int cmd_bootstrap(const BootstrapCmdOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto data = io::parse_dataset(o.data);
  auto built = build_fom(o.fom, data);
  const MleResult est = built.mle_ref ? *built.mle_ref : mle(data);
  const auto res = bootstrap_compare(data, est.state, o.reps, built.fom, o.seed, {}, o.threads);
  double mean = 0.0, var = 0.0;
  for (double v : res.values) mean += v;
  if (!res.values.empty()) mean /= static_cast<double>(res.values.size());
  for (double v : res.values) var += (v - mean) * (v - mean);
  if (res.values.size() > 1) var /= static_cast<double>(res.values.size() - 1);
  json j{{"provenance", provenance(args, {{"data", o.data}, {"figure_of_merit", fom_json(built.fom, o.fom)}, {"reps", o.reps}},
                                   {{"base_seed", o.seed}})},
         {"mle_value", built.fom.evaluate(est.state)},
         {"values", res.values},
         {"failures", res.failures},
         {"mean", mean},
         {"std", std::sqrt(var)}};
  emit(out, j, o.out);
  return 0;
}

json error_json(const std::string& type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum error bars from tomography data", kToolName};
  app.set_help_flag("--help", "print this help message and exit");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "sample, histogram, fit, error bars and confidence");
  analyze->add_option("--data", an.data, "dataset JSON")->required();
  add_fom_options(analyze, an.fom);
  analyze->add_option("--bins", an.bins, "number of histogram bins")->capture_default_str()->check(CLI::Range(2, 1000000));
  analyze->add_option("--range", an.range, "lo:hi or auto")->capture_default_str();
  analyze->add_option("--pilot-samples", an.pilot_samples, "samples of the pilot walk for --range auto")->capture_default_str();
  analyze->add_option("--step-size", an.walk.step_size, "jump length eta")->capture_default_str();
  analyze->add_flag("--auto-tune", an.walk.auto_tune, "tune the step size towards acceptance 0.3");
  analyze->add_option("--n-therm", an.walk.n_therm, "thermalization sweeps")->capture_default_str();
  analyze->add_option("--n-sweep", an.walk.n_sweep, "steps per recorded sample (0: ceil(1/eta))")->capture_default_str();
  analyze->add_option("--n-samples", an.walk.n_samples, "recorded samples per walker")->capture_default_str();
  analyze->add_option("--walkers", an.walk.n_walkers, "independent walkers")->capture_default_str();
  analyze->add_option("--seed", an.walk.base_seed, "base seed")->capture_default_str();
  analyze->add_option("--threads", an.threads, std::string("worker threads (0: ") + kThreadsEnv + " or all cores)")
      ->capture_default_str();
  analyze->add_flag("--no-fit", an.no_fit, "skip the fit");
  analyze->add_option("--max-rel-error", an.max_rel_error, "drop bins with larger relative error from the fit")
      ->capture_default_str();
  add_confidence_options(analyze, an.epsilon, an.delta, an.w_range, an.region);
  analyze->add_option("--out", an.out, "output directory")->capture_default_str();
  analyze->add_flag("--dump-samples", an.dump_samples, "write every recorded value to samples.csv");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "simulate Pauli-product tomography counts");
  simulate->add_option("--state", sim.state, "true state file");
  simulate->add_option("--preset", sim.preset, "built-in true state: noisy-bell");
  simulate->add_option("--calibration", sim.calibration, "calibrated readout file");
  simulate->add_option("--shots", sim.shots, "shots per setting")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "dataset file (default: stdout)");
  simulate->add_option("--state-out", sim.state_out, "also write the true state");
  simulate->add_option("--target-out", sim.target_out, "also write the pure target of the preset");

  MleCmdOptions mo;
  auto* mle_cmd = app.add_subcommand("mle", "maximum-likelihood state");
  mle_cmd->add_option("--data", mo.data, "dataset JSON")->required();
  mle_cmd->add_option("--tol", mo.tol, "stop when lambda decreases by less")->capture_default_str();
  mle_cmd->add_option("--max-iter", mo.max_iter, "iteration limit")->capture_default_str();
  mle_cmd->add_option("--out", mo.out, "output file (default: stdout)");

  FitCmdOptions fo;
  auto* fit = app.add_subcommand("fit", "fit the log-model to a histogram CSV");
  fit->add_option("--histogram", fo.histogram, "histogram CSV")->required();
  fit->add_option("--fom", fo.fom.kind, "figure of merit, selects h and s")->capture_default_str();
  fit->add_option("--extremum", fo.fom.extremum, "observable extremum a");
  fit->add_option("--extremum-dir", fo.fom.extremum_dir, "max | min")->capture_default_str();
  fit->add_option("--h", fo.h, "model offset h (overrides --fom)");
  fit->add_option("--s", fo.s, "model sign s (overrides --fom)");
  fit->add_option("--max-rel-error", fo.max_rel_error, "drop bins with larger relative error")->capture_default_str();
  fit->add_option("--out", fo.out, "output file (default: stdout)");

  QebCmdOptions qo;
  auto* qeb = app.add_subcommand("qeb", "quantum error bars (f0, delta, gamma) from model parameters");
  qeb->add_option("--a2", qo.a2);
  qeb->add_option("--a1", qo.a1);
  qeb->add_option("--m", qo.m);
  qeb->add_option("--c", qo.c)->capture_default_str();
  qeb->add_option("--h", qo.h);
  qeb->add_option("--s", qo.s);
  qeb->add_option("--fit", qo.fit, "fit JSON instead of explicit parameters");

  ConfidenceCmdOptions co;
  auto* conf = app.add_subcommand("confidence", "confidence threshold from a fit or a histogram");
  conf->add_option("--fit", co.fit, "fit JSON");
  conf->add_option("--histogram", co.histogram, "histogram CSV");
  conf->add_option("--fom", co.fom.kind, "figure of merit")->required();
  conf->add_option("--extremum", co.fom.extremum, "observable extremum a");
  conf->add_option("--extremum-dir", co.fom.extremum_dir, "max | min")->capture_default_str();
  conf->add_option("--epsilon", co.epsilon, "confidence parameter")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  conf->add_option("--delta", co.delta, "purified-distance enlargement")->capture_default_str();
  conf->add_option("--w-range", co.w, "spectral width of the observable");
  conf->add_option("--region", co.region, "at-least | at-most");
  conf->add_option("--n", co.n, "total number of measurements");
  conf->add_option("--dim", co.dim, "Hilbert space dimension");
  conf->add_option("--data", co.data, "dataset JSON providing n and dim");
  conf->add_option("--out", co.out, "output file (default: stdout)");

  BootstrapCmdOptions bo;
  auto* boot = app.add_subcommand("bootstrap", "parametric bootstrap of the MLE figure of merit");
  boot->add_option("--data", bo.data, "dataset JSON")->required();
  add_fom_options(boot, bo.fom);
  boot->add_option("--reps", bo.reps, "resamples")->capture_default_str()->check(CLI::PositiveNumber);
  boot->add_option("--seed", bo.seed, "base seed")->capture_default_str();
  boot->add_option("--threads", bo.threads, "worker threads")->capture_default_str();
  boot->add_option("--out", bo.out, "output file (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << '\n';
    return 2;
  }

  try {
    if (*analyze) return cmd_analyze(an, args, out, err);
    if (*simulate) return cmd_simulate(sim, out);
    if (*mle_cmd) return cmd_mle(mo, out);
    if (*fit) return cmd_fit(fo, out);
    if (*qeb) return cmd_qeb(qo, out);
    if (*conf) return cmd_confidence(co, out);
    if (*boot) return cmd_bootstrap(bo, args, out);
  } catch (const UsageError& e) {
    err << error_json("usage", e.what()).dump() << '\n';
    return 2;
  } catch (const io::FormatError& e) {
    json j = error_json("format", e.what());
    j["error"]["field"] = e.field();
    err << j.dump() << '\n';
    return 1;
  } catch (const FitError& e) {
    err << error_json("fit", e.what()).dump() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    err << error_json("domain", e.what()).dump() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << error_json("invalid_argument", e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << error_json("runtime", e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qeb::cli
