#pragma once

#include "menos/builtin.hpp"
#include "menos/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace menos {

enum class ModelId { PhaseDephasing, PointSources };
enum class MeasurementId { Separable, Bell, OptimalHg };
enum class SweepScale { Linear, Log };

ModelId parse_model_id(const std::string& s);
MeasurementId parse_measurement_id(const std::string& s);
std::string to_string(ModelId m);
std::string to_string(MeasurementId m);

struct SweepRange {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  std::optional<SweepScale> scale;  // unset: log for Delta and dx, linear otherwise
};

// "name:start:stop:count[:log|lin]"
SweepRange parse_sweep_range(const std::string& s);
// "name=value"
std::pair<std::string, double> parse_fix(const std::string& s);

struct SweepSpec {
  ModelId model = ModelId::PhaseDephasing;
  std::optional<MeasurementId> measurement;  // unset: separable / optimal-hg by model
  std::map<std::string, double> fixed;
  std::optional<SweepRange> sweep;
  std::size_t oracle_samples = 0;
  std::uint64_t seed = 1;
  std::string out;
  int workers = 0;
  int n_max = 20;
  double p_cutoff = 1e-12;
  std::optional<double> x_m;
};

// Keys mirror the CLI flags: model, measurement, fix {name: value}, sweep
// ("name:start:stop:count[:scale]" or {name, start, stop, count, scale}),
// oracle_samples, seed, out, workers, n_max, p_cutoff, x_m.
SweepSpec spec_from_json(const nlohmann::json& j);

MeasurementId measurement_of(const SweepSpec& spec);
std::vector<std::string> parameter_names(ModelId m);
// Throws SpecError for anything that cannot run: unknown or missing
// parameters, bad ranges, incompatible measurement, sweep leaving the domain.
void validate_spec(const SweepSpec& spec);
std::vector<double> sweep_values(const SweepRange& r);

/// Everything needed to evaluate one sweep point.
struct PointSetup {
  StatisticalModel single;    // one copy, for Q
  StatisticalModel measured;  // what the POVM acts on
  Povm povm;
  int copies;
  ParamPoint theta;
};

PointSetup setup_point(const SweepSpec& spec, double sweep_value);

struct SweepRow {
  std::size_t index = 0;
  double sweep_value = 0.0;
  std::optional<RMatrix> fisher;
  std::optional<RMatrix> qfi;  // single copy
  std::optional<double> r_multi;
  std::vector<std::optional<double>> r_nuisance;
  std::optional<double> sigma_lower;
  std::optional<double> sigma_upper;
  std::vector<double> sigmas;
  std::optional<double> oracle_best;
  std::optional<double> condition;
  std::string error;
  bool singular = false;
  bool invariant_violated = false;
};

SweepRow compute_row(const SweepSpec& spec, std::size_t index, double sweep_value);

// Rows in index order; points run on `spec.workers` OpenMP threads.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);
std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec);

std::vector<std::string> csv_header(const SweepSpec& spec);
void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

// 0 ok, 1 invariant violated in some row, 3 every row singular.
int sweep_exit_code(const std::vector<SweepRow>& rows);

}  // namespace menos
