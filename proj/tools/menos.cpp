// menos: Fisher-information noise susceptibility sweeps and self-checks.
#include "menos/builtin.hpp"
#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "menos/sweep.hpp"
#include "menos/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace menos;

namespace {

constexpr int kExitInvalid = 2;

struct Flags {
  std::string config;
  std::string model, measurement, sweep, out;
  std::vector<std::string> fix;
  std::optional<std::size_t> oracle_samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON file with the same keys as the flags; flags win");
  cmd->add_option("--model", f.model, "phase-dephasing | point-sources");
  cmd->add_option("--measurement", f.measurement, "separable | bell | optimal-hg");
  cmd->add_option("--fix", f.fix, "name=value (repeatable)");
  cmd->add_option("--seed", f.seed, "64-bit seed");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all)");
}

SweepSpec build_spec(const Flags& f) {
  SweepSpec s;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw SpecError("cannot open config " + f.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SpecError("config " + f.config + ": " + e.what());
    }
    s = spec_from_json(j);
  }
  if (!f.model.empty()) s.model = parse_model_id(f.model);
  if (!f.measurement.empty()) s.measurement = parse_measurement_id(f.measurement);
  for (const auto& x : f.fix) {
    const auto [k, v] = parse_fix(x);
    s.fixed[k] = v;
  }
  if (!f.sweep.empty()) s.sweep = parse_sweep_range(f.sweep);
  if (f.oracle_samples) s.oracle_samples = *f.oracle_samples;
  if (f.seed) s.seed = *f.seed;
  if (!f.out.empty()) s.out = f.out;
  if (f.workers) s.workers = *f.workers;
  if (s.sweep && s.sweep->count < 2) throw SpecError("sweep count must be >= 2");
  return s;
}

int cmd_sweep(const Flags& f) {
  const SweepSpec spec = build_spec(f);
  const auto rows = run_sweep(spec);
  if (spec.out.empty() || spec.out == "-") {
    write_csv(std::cout, spec, rows);
  } else {
    std::ofstream os(spec.out, std::ios::binary);
    if (!os) throw SpecError("cannot write " + spec.out);
    write_csv(os, spec, rows);
  }
  std::size_t bad = 0;
  for (const auto& r : rows) bad += !r.error.empty();
  if (bad) std::cerr << bad << " of " << rows.size() << " rows carry an error\n";
  return sweep_exit_code(rows);
}

int cmd_verify(const Flags& f, const std::string& weights) {
  VerifyOptions o;
  if (f.seed) o.seed = *f.seed;
  if (f.workers) o.workers = *f.workers;
  if (!weights.empty()) {
    std::ifstream in(weights);
    if (!in) throw SpecError("cannot open " + weights);
    nlohmann::json j;
    in >> j;
    Eigen::Matrix4d w;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) w(r, c) = j.at(r).at(c).get<double>();
    o.weight_matrix = w;
  }
  const auto results = run_verify(o);
  std::cout << verify_report(results, o).dump(2) << '\n';
  return all_passed(results) ? 0 : 1;
}

void print_matrix(const char* name, const CMatrix& m) {
  std::printf("%s =\n", name);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const cplx z = m(i, j);
      std::printf("  %+.6e%+.6ei", z.real(), z.imag());
    }
    std::printf("\n");
  }
}

void print_matrix(const char* name, const RMatrix& m) {
  std::printf("%s =\n", name);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::printf("  %+.10e", m(i, j));
    std::printf("\n");
  }
}

int cmd_show(const Flags& f) {
  SweepSpec spec = build_spec(f);
  const auto names = parameter_names(spec.model);
  if (spec.sweep) throw SpecError("show-model takes a point (--fix), not a sweep");
  SweepRange r{names.front(), spec.fixed.count(names.front()) ? spec.fixed.at(names.front()) : 0.0, 0.0, 1,
               SweepScale::Linear};
  if (!spec.fixed.count(names.front())) throw SpecError("parameter '" + names.front() + "' not fixed");
  r.stop = r.start;
  spec.fixed.erase(names.front());
  spec.sweep = r;
  validate_spec(spec);
  const PointSetup s = setup_point(spec, r.start);
  std::printf("model %s, measurement %s, copies %d\n", to_string(spec.model).c_str(),
              to_string(measurement_of(spec)).c_str(), s.copies);
  for (std::size_t j = 0; j < names.size(); ++j) std::printf("  %s = %.17g\n", names[j].c_str(), s.theta[j]);
  print_matrix("rho", s.single.state_at(s.theta).matrix());
  print_matrix("F", fisher_bundle(s.measured, s.theta, s.povm, spec.p_cutoff).fisher.matrix());
  print_matrix("Q (one copy)", qfi_matrix(s.single, s.theta).qfi.matrix());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information measurement-noise susceptibility"};
  app.require_subcommand(1);
  Flags f;
  std::string weights;

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter and write CSV");
  add_common(sweep, f);
  sweep->add_option("--sweep", f.sweep, "name:start:stop:count[:log|lin]");
  sweep->add_option("--oracle-samples", f.oracle_samples, "random noises per point (0 = no oracle)");
  sweep->add_option("--out", f.out, "CSV path (default stdout)");

  auto* verify = app.add_subcommand("verify", "run the invariant suite, JSON report on stdout");
  add_common(verify, f);
  verify->add_option("--weights", weights, "JSON 4x4 HG weight matrix replacing the built-in one");

  auto* show = app.add_subcommand("show-model", "print rho, F and Q at one point");
  add_common(show, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*sweep) return cmd_sweep(f);
    if (*verify) return cmd_verify(f, weights);
    return cmd_show(f);
  } catch (const SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
