#include "menos/verify.hpp"

#include "menos/builtin.hpp"
#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "menos/oracle.hpp"
#include "menos/random.hpp"
#include "menos/susceptibility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace menos {

namespace {

// Collects the worst deviation of one invariant over many cases.
class Check {
 public:
  Check(std::string module, std::string name, double threshold)
      : module_(std::move(module)), name_(std::move(name)), threshold_(threshold) {}

  void observe(double deviation, const std::string& where = {}) {
    if (!(deviation <= worst_)) {  // NaN counts as worst
      worst_ = deviation;
      where_ = where;
    }
    ++cases_;
  }
  void fail(const std::string& why) {
    error_ = why;
    ++cases_;
  }

  InvariantResult result() const {
    const bool ok = error_.empty() && std::isfinite(worst_) && worst_ <= threshold_;
    std::ostringstream os;
    os << cases_ << " cases";
    if (!where_.empty()) os << "; worst at " << where_;
    if (!error_.empty()) os << "; error: " << error_;
    return InvariantResult{module_, name_, ok, worst_, threshold_, os.str()};
  }

 private:
  std::string module_, name_;
  double threshold_;
  double worst_ = 0.0;
  std::string where_, error_;
  std::size_t cases_ = 0;
};

template <class F>
void guarded(Check& c, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
}

std::string label(std::size_t i) { return "instance " + std::to_string(i); }

HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng) {
  HermitianOperator h = random_traceless_hermitian(dim, rng);
  std::normal_distribution<double> g;
  return h + g(rng) * HermitianOperator::identity(dim);
}

void linalg_checks(const VerifyOptions& o, std::vector<InvariantResult>& out) {
  Check eig("linalg-core", "eigendecomposition reconstructs H", 1e-10);
  Check tn("linalg-core", "trace norm >= |trace|", 0.0);
  Check ass("linalg-core", "tensor product associative", 1e-12);
  for (std::size_t i = 0; i < 40; ++i) {
    Rng rng = stream_rng(o.seed, 100 + i);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(i % 15);
    const HermitianOperator h = random_hermitian(dim, rng);
    guarded(eig, [&] {
      const HermitianEigen e = eig_hermitian(h);
      const CMatrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
      eig.observe((back - h.matrix()).cwiseAbs().maxCoeff() / std::max(1.0, h.max_abs()), label(i));
    });
    guarded(tn, [&] { tn.observe(std::max(0.0, std::abs(h.trace()) - trace_norm(h) - 1e-12), label(i)); });
    guarded(ass, [&] {
      const HermitianOperator a = random_hermitian(2, rng), b = random_hermitian(3, rng), c = random_hermitian(2, rng);
      ass.observe((tensor(tensor(a, b), c).matrix() - tensor(a, tensor(b, c)).matrix()).cwiseAbs().maxCoeff(), label(i));
    });
  }
  out.push_back(eig.result());
  out.push_back(tn.result());
  out.push_back(ass.result());
}

struct BuiltinCase {
  StatisticalModel model;
  ParamPoint theta;
  Povm povm;
  StatisticalModel single;
  int copies;
};

std::vector<BuiltinCase> builtin_cases(const VerifyOptions& o) {
  std::vector<BuiltinCase> cases;
  Rng rng = stream_rng(o.seed, 7);
  std::uniform_real_distribution<double> phi(0.0, 2.0 * std::numbers::pi), delta(1e-3, 2.0);
  std::uniform_real_distribution<double> xc(-0.5, 0.5), dx(0.05, 1.0), q(0.1, 0.9);
  const StatisticalModel qb = qubit_phase_dephasing();
  const StatisticalModel q2 = tensor_model(qb, 2);
  for (int i = 0; i < 10; ++i) {
    const ParamPoint t = qb.point({phi(rng), delta(rng)});
    cases.push_back({qb, t, separable_povm(), qb, 1});
    cases.push_back({q2, t, bell_povm(), qb, 2});
  }
  for (int i = 0; i < 6; ++i) {
    const ParamPoint t({xc(rng), dx(rng), q(rng)}, {"x_c", "dx", "q"});
    PointSourceConfig cfg;
    cfg.x_m = x_opt(t);
    const StatisticalModel m = point_source_model(cfg);
    cases.push_back({m, t, optimal_povm_point_sources(cfg), m, 1});
  }
  return cases;
}

void model_checks(const std::vector<BuiltinCase>& cases, std::vector<InvariantResult>& out) {
  Check tr("quantum-model", "state has unit trace", 1e-8);
  Check psd("quantum-model", "state is positive semidefinite", 1e-10);
  Check dtr("quantum-model", "derivatives are traceless", 1e-8);
  Check fd("quantum-model", "analytic derivatives match central differences", 1e-7);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const std::string where = c.model.name() + " " + label(i);
    guarded(tr, [&] { tr.observe(std::abs(c.model.state_at(c.theta).trace() - 1.0), where); });
    guarded(psd, [&] { psd.observe(std::max(0.0, -min_eigenvalue(c.model.state_at(c.theta))), where); });
    guarded(dtr, [&] {
      double w = 0.0;
      for (const auto& d : c.model.derivatives_at(c.theta)) w = std::max(w, std::abs(d.trace()));
      dtr.observe(w, where);
    });
    guarded(fd, [&] {
      const auto a = c.model.derivatives_at(c.theta);
      const auto n = c.model.with_finite_differences().derivatives_at(c.theta);
      double w = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j)
        w = std::max(w, (a[j].matrix() - n[j].matrix()).cwiseAbs().maxCoeff() / std::max(1.0, a[j].max_abs()));
      fd.observe(w, where);
    });
  }
  for (auto* c : {&tr, &psd, &dtr, &fd}) out.push_back(c->result());
}

void fisher_checks(const std::vector<BuiltinCase>& cases, const VerifyOptions& o, std::vector<InvariantResult>& out) {
  Check norm("fisher-info", "outcome probabilities sum to one", 1e-8);
  Check dsum("fisher-info", "derivative traces sum to zero", 1e-8);
  Check gap("fisher-info", "m Q - F is positive semidefinite", 1e-8);
  Check rge("fisher-info", "r >= 1", 1e-9);
  Check sld_res("fisher-info", "SLD solves 2 d rho = L rho + rho L", 1e-10);
  Check weak("fisher-info", "qubit model is weakly commutative", 1e-9);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const std::string where = c.model.name() + " " + label(i);
    guarded(norm, [&] {
      const FisherBundle b = fisher_bundle(c.model, c.theta, c.povm);
      double s = 0.0;
      for (double p : b.probabilities) s += p;
      norm.observe(std::abs(s - c.model.state_at(c.theta).trace()), where);
      dsum.observe(b.derivative_traces.colwise().sum().cwiseAbs().maxCoeff(), where);
      const RealSymmetricMatrix q = qfi_matrix(c.single, c.theta).qfi;
      const RMatrix g = c.copies * q.matrix() - b.fisher.matrix();
      gap.observe(std::max(0.0, -Eigen::SelfAdjointEigenSolver<RMatrix>(g).eigenvalues().minCoeff()), where);
      rge.observe(std::max(0.0, 1.0 - r_metric(b.fisher, q, c.copies)), where);
    });
  }
  for (std::size_t i = 0; i < o.random_instances; ++i) {
    guarded(gap, [&] {
      const RandomInstance r = random_instance(o.seed, i);
      const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
      const QfiBundle q = qfi_matrix(r.rho, r.derivatives);
      const RMatrix g = q.qfi.matrix() - b.fisher.matrix();
      gap.observe(std::max(0.0, -Eigen::SelfAdjointEigenSolver<RMatrix>(g).eigenvalues().minCoeff()), label(i));
      for (std::size_t j = 0; j < r.derivatives.size(); ++j) {
        const CMatrix& l = q.slds[j].matrix();
        const CMatrix res = l * r.rho.matrix() + r.rho.matrix() * l - 2.0 * r.derivatives[j].matrix();
        sld_res.observe(res.cwiseAbs().maxCoeff(), label(i));
      }
    });
  }
  const StatisticalModel qb = qubit_phase_dephasing();
  for (double d : {1e-3, 0.04, 0.3, 1.0, 2.0})
    guarded(weak, [&] {
      const QfiBundle q = qfi_matrix(qb, qb.point({std::numbers::pi / 4.0, d}));
      weak.observe(weak_commutativity(qb.state_at(qb.point({std::numbers::pi / 4.0, d})), q.slds[0], q.slds[1]),
                   "Delta=" + std::to_string(d));
    });
  for (auto* c : {&norm, &dsum, &gap, &rge, &sld_res, &weak}) out.push_back(c->result());
}

Povm random_noise(const Povm& target, Rng& rng) {
  return random_povm(target.dim(), target.size(), rng);
}

void susceptibility_checks(const VerifyOptions& o, std::vector<InvariantResult>& out) {
  Check self("susceptibility", "X[M, M] = 0", 1e-9);
  Check trace("susceptibility", "tr Xi = X", 1e-10);
  Check paths("susceptibility", "frame, convex-sum and linear-functional X agree", 1e-9);
  Check reparam("susceptibility", "X invariant under reparametrization", 1e-8);
  Check eps("susceptibility", "determinant quotient converges linearly to X", 0.05);
  Check pad("susceptibility", "zero padding leaves X unchanged", 1e-12);
  Check perm("susceptibility", "bounds invariant under outcome relabeling", 1e-9);
  Check collapse("susceptibility", "P = 1: Sigma_L = Sigma^U = sigma", 1e-10);
  Check upper("susceptibility", "oracle best X <= Sigma^U", 1e-9);
  Check lower("susceptibility", "Sigma_L <= oracle best X", 1e-9);

  for (std::size_t i = 0; i < o.random_instances; ++i) {
    const std::string where = label(i);
    guarded(self, [&] {
      const RandomInstance r = random_instance(o.seed, i);
      Rng rng = stream_rng(o.seed, 1000 + i);
      const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
      const ATensor a = a_tensor(b, r.derivatives, r.rho);
      const std::size_t p = r.derivatives.size();
      const double scale = std::max(1.0, condition_number(b.fisher));

      self.observe(std::abs(x_scalar(b.fisher, g_matrix(a, r.povm), p)) / scale, where);

      const Povm n = random_noise(r.povm, rng);
      const RealSymmetricMatrix g = g_matrix(a, n);
      const double x = x_scalar(b.fisher, g, p);
      const double xs = std::max(1.0, std::abs(x));
      trace.observe(std::abs(xi_matrix(b.fisher, g).trace() - x) / xs, where);

      const DiagonalizedFrame fr = diagonalize_frame(b, r.derivatives, r.rho);
      const NoiseFunctional nf(a, b.fisher);
      paths.observe(std::max(std::abs(x_convex_sum(fr, r.rho, n) - x), std::abs(nf.evaluate(n) - x)) / xs, where);

      // random invertible chart
      std::normal_distribution<double> gauss;
      RMatrix k(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      for (Eigen::Index u = 0; u < k.rows(); ++u)
        for (Eigen::Index v = 0; v < k.cols(); ++v) k(u, v) = gauss(rng) + (u == v ? 2.0 : 0.0);
      const auto dk = transform_derivatives(r.derivatives, k);
      const FisherBundle bk = fisher_bundle(r.rho, dk, r.povm);
      const double xk = x_scalar(bk.fisher, g_matrix(a_tensor(bk, dk, r.rho), n), p);
      reparam.observe(std::abs(xk - x) / xs, where);

      // |X_eps - X| should halve when eps halves
      const double e1 = std::abs(x_finite_epsilon(r.rho, r.derivatives, r.povm, n, 1e-4) - x);
      const double e2 = std::abs(x_finite_epsilon(r.rho, r.derivatives, r.povm, n, 5e-5) - x);
      eps.observe(e1 < 1e-9 * xs ? 0.0 : std::abs(e2 / e1 - 0.5), where);

      const Povm padded = n.padded(n.size() + 3);
      pad.observe(std::abs(x_scalar(b.fisher, g_matrix(a, padded), p) - x), where);

      std::vector<std::size_t> order(r.povm.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = order.size() - 1 - j;
      const SusceptibilityReport s0 = susceptibility_report(r.rho, r.derivatives, r.povm);
      const SusceptibilityReport s1 = susceptibility_report(r.rho, r.derivatives, r.povm.permuted(order));
      perm.observe(std::max(std::abs(s0.sigma_lower - s1.sigma_lower), std::abs(s0.sigma_upper - s1.sigma_upper)) /
                       std::max(1.0, s0.sigma_upper),
                   where);

      const std::vector<HermitianOperator> one{r.derivatives.front()};
      const SusceptibilityReport s = susceptibility_report(r.rho, one, r.povm);
      const double sig = sigma_single(r.rho, one.front(), r.povm);
      collapse.observe(std::max(std::abs(s.sigma_lower - sig), std::abs(s.sigma_upper - sig)) / std::max(1.0, sig),
                       where);

      const OracleResult orc = noise_search_oracle(nf, o.oracle_samples, o.seed + i, o.workers);
      const double tol = 1e-9 * std::max(1.0, s0.sigma_upper);
      upper.observe(std::max(0.0, orc.best_x - s0.sigma_upper - tol), where);
      lower.observe(std::max(0.0, s0.sigma_lower - orc.best_x - tol), where);
    });
  }
  for (auto* c : {&self, &trace, &paths, &reparam, &eps, &pad, &perm, &collapse, &upper, &lower})
    out.push_back(c->result());
}

void builtin_checks(const VerifyOptions& o, std::vector<InvariantResult>& out) {
  Check ovl("builtin-models", "HG overlap quadrature matches closed form", 1e-10);
  Check gram("builtin-models", "HG modes orthonormal", 1e-12);
  Check w("builtin-models", "w w^T = I", 1e-12);
  Check povm("builtin-models", "built-in POVMs valid", kPovmTol);
  Check conv("builtin-models", "F converged in n_max (20 vs 30)", 1e-8);
  Check qf("builtin-models", "qubit F at phi = pi/4 has closed form", 1e-12);

  for (int n = 0; n <= 30; n += 3)
    for (double x0 : {-0.8, 0.05, 0.4, 1.5})
      guarded(ovl, [&] {
        ovl.observe(std::abs(hg_overlap(n, x0, 0.1) - hg_overlap_closed_form(n, x0, 0.1)),
                    "n=" + std::to_string(n) + " x0=" + std::to_string(x0));
      });
  guarded(gram, [&] {
    gram.observe((hg_gram(30) - RMatrix::Identity(31, 31)).cwiseAbs().maxCoeff(), "n_max=30");
  });
  const Eigen::Matrix4d wm = o.weight_matrix.value_or(optimal_weight_matrix());
  w.observe(weight_orthonormality_residual(wm), o.weight_matrix ? "supplied w" : "built-in w");

  PointSourceConfig cfg;
  cfg.x_m = 0.0;
  auto validate = [&](const std::function<Povm()>& make, const std::string& name) {
    guarded(povm, [&] {
      const PovmValidation v = validate_povm(make(), kPovmTol);
      povm.observe(std::max(std::max(0.0, -v.min_eigenvalue), v.completeness_residual), name);
    });
  };
  validate(separable_povm, "separable");
  validate(bell_povm, "bell");
  validate([&] { return optimal_povm_point_sources(cfg, wm); }, "optimal-hg");

  guarded(conv, [&] {
    const ParamPoint t({0.0, 0.1, 0.5}, {"x_c", "dx", "q"});
    PointSourceConfig c20{20, x_opt(t)}, c30{30, x_opt(t)};
    const RMatrix f20 = fisher_bundle(point_source_model(c20), t, optimal_povm_point_sources(c20, wm)).fisher.matrix();
    const RMatrix f30 = fisher_bundle(point_source_model(c30), t, optimal_povm_point_sources(c30, wm)).fisher.matrix();
    conv.observe((f20 - f30).cwiseAbs().maxCoeff() / f30.cwiseAbs().maxCoeff(), "theta=(0, 0.1, 0.5)");
  });
  const StatisticalModel qb = qubit_phase_dephasing();
  for (double d : {1e-3, 0.1, 1.0})
    guarded(qf, [&] {
      const RMatrix f = fisher_bundle(qb, qb.point({std::numbers::pi / 4.0, d}), separable_povm()).fisher.matrix();
      const double e = std::exp(-2.0 * d), want = e / (2.0 - e);
      qf.observe(std::max({std::abs(f(0, 0) - want), std::abs(f(1, 1) - want), std::abs(f(0, 1))}),
                 "Delta=" + std::to_string(d));
    });
  for (auto* c : {&ovl, &gram, &w, &povm, &conv, &qf}) out.push_back(c->result());
}

}  // namespace

std::vector<InvariantResult> run_verify(const VerifyOptions& options) {
  std::vector<InvariantResult> out;
  linalg_checks(options, out);
  std::vector<BuiltinCase> cases;
  try {
    cases = builtin_cases(options);
  } catch (const std::exception& e) {
    out.push_back({"quantum-model", "built-in models construct", false, INFINITY, 0.0, e.what()});
  }
  model_checks(cases, out);
  fisher_checks(cases, options, out);
  susceptibility_checks(options, out);
  builtin_checks(options, out);
  return out;
}

bool all_passed(const std::vector<InvariantResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.passed; });
}

nlohmann::json verify_report(const std::vector<InvariantResult>& results, const VerifyOptions& options) {
  nlohmann::json j;
  j["seed"] = options.seed;
  j["passed"] = all_passed(results);
  j["invariants"] = nlohmann::json::array();
  for (const auto& r : results)
    j["invariants"].push_back({{"module", r.module},
                               {"name", r.name},
                               {"passed", r.passed},
                               {"value", std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr)},
                               {"threshold", r.threshold},
                               {"detail", r.detail}});
  return j;
}

}  // namespace menos
