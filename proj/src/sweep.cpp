#include "menos/sweep.hpp"

#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "menos/oracle.hpp"
#include "menos/susceptibility.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace menos {

ModelId parse_model_id(const std::string& s) {
  if (s == "phase-dephasing") return ModelId::PhaseDephasing;
  if (s == "point-sources") return ModelId::PointSources;
  throw SpecError("unknown model '" + s + "' (expected phase-dephasing or point-sources)");
}

MeasurementId parse_measurement_id(const std::string& s) {
  if (s == "separable") return MeasurementId::Separable;
  if (s == "bell") return MeasurementId::Bell;
  if (s == "optimal-hg") return MeasurementId::OptimalHg;
  throw SpecError("unknown measurement '" + s + "' (expected separable, bell or optimal-hg)");
}

std::string to_string(ModelId m) { return m == ModelId::PhaseDephasing ? "phase-dephasing" : "point-sources"; }

std::string to_string(MeasurementId m) {
  switch (m) {
    case MeasurementId::Separable: return "separable";
    case MeasurementId::Bell: return "bell";
    case MeasurementId::OptimalHg: return "optimal-hg";
  }
  return "?";
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SpecError("cannot read " + what + " from '" + s + "'");
  }
}

SweepScale parse_scale(const std::string& s) {
  if (s == "log") return SweepScale::Log;
  if (s == "lin" || s == "linear") return SweepScale::Linear;
  throw SpecError("sweep scale must be log or lin, not '" + s + "'");
}

SweepScale scale_of(const SweepRange& r) {
  if (r.scale) return *r.scale;
  return (r.name == "Delta" || r.name == "dx") ? SweepScale::Log : SweepScale::Linear;
}

}  // namespace

SweepRange parse_sweep_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 4 && parts.size() != 5)
    throw SpecError("--sweep expects name:start:stop:count[:log|lin], got '" + s + "'");
  SweepRange r;
  r.name = parts[0];
  r.start = parse_double(parts[1], "sweep start");
  r.stop = parse_double(parts[2], "sweep stop");
  const double c = parse_double(parts[3], "sweep count");
  if (c != std::floor(c) || c < 1 || c > 1e7) throw SpecError("sweep count must be a positive integer");
  r.count = static_cast<int>(c);
  if (parts.size() == 5) r.scale = parse_scale(parts[4]);
  return r;
}

std::pair<std::string, double> parse_fix(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw SpecError("--fix expects name=value, got '" + s + "'");
  return {s.substr(0, eq), parse_double(s.substr(eq + 1), "value of " + s.substr(0, eq))};
}

SweepSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("config must be a JSON object");
  static const std::vector<std::string> known{"model", "measurement", "fix", "sweep", "oracle_samples", "seed",
                                              "out", "workers", "n_max", "p_cutoff", "x_m"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw SpecError("unknown config key '" + k + "'");
  SweepSpec s;
  try {
    if (j.contains("model")) s.model = parse_model_id(j.at("model").get<std::string>());
    if (j.contains("measurement")) s.measurement = parse_measurement_id(j.at("measurement").get<std::string>());
    if (j.contains("fix"))
      for (const auto& [k, v] : j.at("fix").items()) s.fixed[k] = v.get<double>();
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      if (sw.is_string()) {
        s.sweep = parse_sweep_range(sw.get<std::string>());
      } else {
        SweepRange r;
        r.name = sw.at("name").get<std::string>();
        r.start = sw.at("start").get<double>();
        r.stop = sw.at("stop").get<double>();
        r.count = sw.at("count").get<int>();
        if (sw.contains("scale")) r.scale = parse_scale(sw.at("scale").get<std::string>());
        s.sweep = r;
      }
    }
    if (j.contains("oracle_samples")) s.oracle_samples = j.at("oracle_samples").get<std::size_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) s.out = j.at("out").get<std::string>();
    if (j.contains("workers")) s.workers = j.at("workers").get<int>();
    if (j.contains("n_max")) s.n_max = j.at("n_max").get<int>();
    if (j.contains("p_cutoff")) s.p_cutoff = j.at("p_cutoff").get<double>();
    if (j.contains("x_m")) s.x_m = j.at("x_m").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("config: ") + e.what());
  }
  return s;
}

MeasurementId measurement_of(const SweepSpec& spec) {
  if (spec.measurement) return *spec.measurement;
  return spec.model == ModelId::PhaseDephasing ? MeasurementId::Separable : MeasurementId::OptimalHg;
}

std::vector<std::string> parameter_names(ModelId m) {
  if (m == ModelId::PhaseDephasing) return {"phi", "Delta"};
  return {"x_c", "dx", "q"};
}

std::vector<double> sweep_values(const SweepRange& r) {
  std::vector<double> v(static_cast<std::size_t>(r.count));
  if (r.count == 1) {
    v[0] = r.start;
    return v;
  }
  const bool log = scale_of(r) == SweepScale::Log;
  for (int i = 0; i < r.count; ++i) {
    const double t = static_cast<double>(i) / (r.count - 1);
    v[static_cast<std::size_t>(i)] =
        log ? std::exp(std::log(r.start) + t * (std::log(r.stop) - std::log(r.start))) : r.start + t * (r.stop - r.start);
  }
  v.front() = r.start;
  v.back() = r.stop;
  return v;
}

namespace {

ParamPoint theta_for(const SweepSpec& spec, double sweep_value) {
  const auto names = parameter_names(spec.model);
  std::vector<double> vals;
  for (const auto& n : names) {
    if (spec.sweep && spec.sweep->name == n)
      vals.push_back(sweep_value);
    else
      vals.push_back(spec.fixed.at(n));
  }
  return ParamPoint(vals, names);
}

}  // namespace

void validate_spec(const SweepSpec& spec) {
  const auto names = parameter_names(spec.model);
  const auto known = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  if (!spec.sweep) throw SpecError("no sweep given");
  const SweepRange& r = *spec.sweep;
  if (!known(r.name)) throw SpecError("model " + to_string(spec.model) + " has no parameter '" + r.name + "'");
  for (const auto& [k, v] : spec.fixed) {
    if (!known(k)) throw SpecError("model " + to_string(spec.model) + " has no parameter '" + k + "'");
    if (k == r.name) throw SpecError("parameter '" + k + "' is both fixed and swept");
  }
  for (const auto& n : names)
    if (n != r.name && !spec.fixed.count(n)) throw SpecError("parameter '" + n + "' is neither fixed nor swept");
  if (r.count < 1) throw SpecError("sweep count must be >= 1");
  if (!std::isfinite(r.start) || !std::isfinite(r.stop)) throw SpecError("sweep bounds must be finite");
  if (scale_of(r) == SweepScale::Log && !(r.start > 0.0 && r.stop > 0.0))
    throw SpecError("log sweep of '" + r.name + "' needs positive bounds");
  const MeasurementId m = measurement_of(spec);
  if (spec.model == ModelId::PhaseDephasing && m == MeasurementId::OptimalHg)
    throw SpecError("measurement optimal-hg belongs to the point-sources model");
  if (spec.model == ModelId::PointSources && m != MeasurementId::OptimalHg)
    throw SpecError("measurement " + to_string(m) + " belongs to the phase-dephasing model");
  if (spec.n_max < 3 || spec.n_max > 60) throw SpecError("n_max must lie in [3, 60]");
  if (!(spec.p_cutoff >= 0.0 && spec.p_cutoff < 1e-2)) throw SpecError("p_cutoff must lie in [0, 1e-2)");
  if (spec.workers < 0) throw SpecError("workers must be >= 0");

  for (double v : {r.start, r.stop}) {
    const ParamPoint theta = theta_for(spec, v);
    try {
      if (spec.model == ModelId::PhaseDephasing)
        qubit_phase_dephasing().check_domain(theta);
      else
        point_source_model(PointSourceConfig{spec.n_max, 0.0}).check_domain(theta);
    } catch (const DomainError& e) {
      throw SpecError(std::string("sweep leaves the model domain: ") + e.what());
    }
  }
}

PointSetup setup_point(const SweepSpec& spec, double sweep_value) {
  ParamPoint theta = theta_for(spec, sweep_value);
  if (spec.model == ModelId::PhaseDephasing) {
    StatisticalModel q = qubit_phase_dephasing();
    if (measurement_of(spec) == MeasurementId::Bell)
      return PointSetup{q, tensor_model(q, 2), bell_povm(), 2, std::move(theta)};
    return PointSetup{q, q, separable_povm(), 1, std::move(theta)};
  }
  PointSourceConfig cfg{spec.n_max, spec.x_m};
  StatisticalModel m = point_source_model_at(cfg, theta);
  return PointSetup{m, m, optimal_povm_point_sources(cfg), 1, std::move(theta)};
}

namespace {

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

bool is_psd(const RMatrix& m, double tol) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

SweepRow compute_row(const SweepSpec& spec, std::size_t index, double sweep_value) {
  SweepRow row;
  row.index = index;
  row.sweep_value = sweep_value;
  try {
    const PointSetup s = setup_point(spec, sweep_value);
    const HermitianOperator rho = s.measured.state_at(s.theta);
    const auto derivs = s.measured.derivatives_at(s.theta);
    const FisherBundle b = fisher_bundle(rho, derivs, s.povm, spec.p_cutoff);
    const RealSymmetricMatrix q = qfi_matrix(s.single, s.theta).qfi;
    row.fisher = b.fisher.matrix();
    row.qfi = q.matrix();
    row.condition = condition_number(b.fisher);

    const RMatrix gap = s.copies * q.matrix() - b.fisher.matrix();
    if (!is_psd(gap, 1e-8 * std::max(1.0, q.matrix().cwiseAbs().maxCoeff()))) {
      row.invariant_violated = true;
      row.error = "invariant violated: m Q - F is not positive semidefinite";
      return row;
    }

    row.r_multi = r_metric(b.fisher, q, s.copies);
    for (std::size_t j = 0; j < b.num_params(); ++j) row.r_nuisance.push_back(r_nuisance(b.fisher, q, j, s.copies));

    const SusceptibilityReport rep = susceptibility_report(rho, derivs, s.povm, {spec.p_cutoff, kMaxConditionNumber});
    row.sigma_lower = rep.sigma_lower;
    row.sigma_upper = rep.sigma_upper;
    row.sigmas = rep.per_parameter_sigmas;
    if (spec.oracle_samples > 0) {
      const OracleResult o =
          noise_search_oracle(rho, derivs, s.povm, spec.oracle_samples, spec.seed * 1000003ULL + index, 1,
                              {spec.p_cutoff, kMaxConditionNumber});
      row.oracle_best = o.best_x;
    }
  } catch (const SingularFisherError& e) {
    row.singular = true;
    row.error = clean(std::string("singular Fisher matrix: ") + e.what());
  } catch (const Error& e) {
    row.error = clean(e.what());
  }
  return row;
}

std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec) {
  validate_spec(spec);
  const auto values = sweep_values(*spec.sweep);
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back(compute_row(spec, i, values[i]));
  return rows;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.workers == 1) return run_sweep_serial(spec);
  validate_spec(spec);
  const auto values = sweep_values(*spec.sweep);
  std::vector<SweepRow> rows(values.size());
  const auto n = static_cast<long long>(values.size());
#ifdef _OPENMP
  const int threads = spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    rows[k] = compute_row(spec, k, values[k]);
  }
  return rows;
}

std::vector<std::string> csv_header(const SweepSpec& spec) {
  const auto names = parameter_names(spec.model);
  std::vector<std::string> h{"sweep_value"};
  for (const char* tag : {"F", "Q"})
    for (std::size_t j = 0; j < names.size(); ++j)
      for (std::size_t k = j; k < names.size(); ++k) h.push_back(std::string(tag) + "_" + names[j] + "_" + names[k]);
  h.push_back("r_multi");
  for (const auto& n : names) h.push_back("r_nuisance_" + n);
  h.push_back("sigma_lower");
  h.push_back("sigma_upper");
  for (const auto& n : names) h.push_back("sigma_" + n);
  h.push_back("oracle_best_X");
  h.push_back("condition_number_F");
  h.push_back("error");
  return h;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  const auto header = csv_header(spec);
  const std::size_t p = parameter_names(spec.model).size();
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> cells{num(r.sweep_value)};
    for (const auto* m : {&r.fisher, &r.qfi})
      for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = j; k < p; ++k)
          cells.push_back(*m ? num((**m)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))) : "");
    cells.push_back(num(r.r_multi));
    for (std::size_t j = 0; j < p; ++j) cells.push_back(j < r.r_nuisance.size() ? num(r.r_nuisance[j]) : "");
    cells.push_back(num(r.sigma_lower));
    cells.push_back(num(r.sigma_upper));
    for (std::size_t j = 0; j < p; ++j) cells.push_back(j < r.sigmas.size() ? num(r.sigmas[j]) : "");
    cells.push_back(num(r.oracle_best));
    cells.push_back(num(r.condition));
    cells.push_back(r.error);
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }
}

int sweep_exit_code(const std::vector<SweepRow>& rows) {
  if (std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.invariant_violated; })) return 1;
  if (!rows.empty() && std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.singular; }))
    return 3;
  return 0;
}

}  // namespace menos
