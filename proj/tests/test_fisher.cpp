#include "menos/builtin.hpp"
#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "menos/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace menos;

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

oracle::StateFn state_fn(const StatisticalModel& m) {
  return [m](const std::vector<double>& t) { return m.state_at(m.point(t)).matrix(); };
}

std::vector<oracle::CMat> raw(const Povm& p) {
  std::vector<oracle::CMat> out;
  for (const auto& e : p.elements()) out.push_back(e.matrix());
  return out;
}

}  // namespace

TEST_SUITE("fisher") {

TEST_CASE("qubit, separable POVM at phi = pi/4: F = e^{-2D} / (2 - e^{-2D}) I") {
  const StatisticalModel m = qubit_phase_dephasing();
  for (double d : {1e-3, 0.05, 0.3, 1.0}) {
    const FisherBundle b = fisher_bundle(m, m.point({kQuarterPi, d}), separable_povm());
    const double e = std::exp(-2 * d), want = e / (2 - e);
    CHECK(b.fisher(0, 0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(b.fisher(1, 1) == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(b.fisher(0, 1)) < 1e-14);
    CHECK(b.kept.size() == 4);
  }
}

TEST_CASE("Fisher matrix agrees with finite differences of Born probabilities") {
  const StatisticalModel m = qubit_phase_dephasing();
  const StatisticalModel m2 = tensor_model(m, 2);
  for (double phi : {0.2, kQuarterPi, 1.3})
    for (double d : {0.02, 0.5}) {
      const RMatrix f = fisher_bundle(m, m.point({phi, d}), separable_povm()).fisher.matrix();
      const RMatrix ref = oracle::fd_fisher(state_fn(m), {phi, d}, raw(separable_povm()));
      CHECK((f - ref).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, ref.norm()));
      const RMatrix fb = fisher_bundle(m2, m2.point({phi, d}), bell_povm()).fisher.matrix();
      const RMatrix refb = oracle::fd_fisher(state_fn(m2), {phi, d}, raw(bell_povm()));
      CHECK((fb - refb).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, refb.norm()));
    }
}

TEST_CASE("qubit QFI: closed form and Bures-metric oracle") {
  const StatisticalModel m = qubit_phase_dephasing();
  for (double d : {0.01, 0.3, 1.2}) {
    const RMatrix q = qfi_matrix(m, m.point({kQuarterPi, d})).qfi.matrix();
    const double e = std::exp(-2 * d);
    CHECK(q(0, 0) == doctest::Approx(e).epsilon(1e-10));
    CHECK(q(1, 1) == doctest::Approx(e / (1 - e)).epsilon(1e-10));
    CHECK(std::abs(q(0, 1)) < 1e-10 * q(1, 1));
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(q(j, j) == doctest::Approx(oracle::bures_qfi_diagonal(state_fn(m), {kQuarterPi, d}, j, j == 0 ? 1e-4 : std::min(1e-4, 1e-3 * d))).epsilon(1e-5));
  }
}

TEST_CASE("SLD solves its defining equation") {
  const StatisticalModel m = qubit_phase_dephasing();
  const ParamPoint t = m.point({kQuarterPi, 0.3});
  const HermitianOperator rho = m.state_at(t);
  const auto d = m.derivatives_at(t);
  for (std::size_t j = 0; j < 2; ++j) {
    const HermitianOperator l = sld(rho, d[j]);
    const CMatrix res = l.matrix() * rho.matrix() + rho.matrix() * l.matrix() - 2.0 * d[j].matrix();
    CHECK(res.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pure states: kernel block of the SLD is cut off") {
  // psi = (cos a, e^{ib} sin a): Q = diag(4, sin^2 2a)
  const double a = 0.4, b = 1.1;
  CVector psi(2), da(2), db(2);
  psi << std::cos(a), std::exp(cplx(0, b)) * std::sin(a);
  da << -std::sin(a), std::exp(cplx(0, b)) * std::cos(a);
  db << 0.0, cplx(0, 1) * std::exp(cplx(0, b)) * std::sin(a);
  const HermitianOperator rho(psi * psi.adjoint());
  const std::vector<HermitianOperator> d{HermitianOperator(da * psi.adjoint() + psi * da.adjoint()),
                                         HermitianOperator(db * psi.adjoint() + psi * db.adjoint())};
  const RMatrix q = qfi_matrix(rho, d).qfi.matrix();
  CHECK(q(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(q(1, 1) == doctest::Approx(std::pow(std::sin(2 * a), 2)).epsilon(1e-12));
  CHECK(std::abs(q(0, 1)) < 1e-12);
}

TEST_CASE("QFI dominates the Fisher matrix on random instances") {
  for (int i = 0; i < 20; ++i) {
    const RandomInstance r = random_instance(42, i);
    const RMatrix g = qfi_matrix(r.rho, r.derivatives).qfi.matrix() -
                      fisher_bundle(r.rho, r.derivatives, r.povm).fisher.matrix();
    CHECK(Eigen::SelfAdjointEigenSolver<RMatrix>(g).eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("weak commutativity of the qubit model") {
  const StatisticalModel m = qubit_phase_dephasing();
  for (double d : {0.01, 0.5}) {
    const ParamPoint t = m.point({0.9, d});
    const QfiBundle q = qfi_matrix(m, t);
    CHECK(weak_commutativity(m.state_at(t), q.slds[0], q.slds[1]) < 1e-9);
  }
}

TEST_CASE("outcomes with vanishing probability") {
  CMatrix r(2, 2);
  r << 1.0, 0.0, 0.0, 0.0;
  const HermitianOperator rho(r);
  CMatrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  CMatrix z(2, 2);
  z << -1.0, 0.0, 0.0, 1.0;
  CVector e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  const Povm comp({HermitianOperator::projector(e0), HermitianOperator::projector(e1)});

  const FisherBundle b = fisher_bundle(rho, {HermitianOperator(x)}, comp);
  CHECK(b.kept == std::vector<std::size_t>{0});
  CHECK(b.scores(1, 0) == 0.0);
  CHECK_FALSE(b.is_kept(1));

  CHECK_THROWS_AS(fisher_bundle(rho, {HermitianOperator(z)}, comp), SingularScoreError);
}

TEST_CASE("inverse of a singular Fisher matrix reports the condition number") {
  RMatrix f(2, 2);
  f << 1.0, 1.0, 1.0, 1.0 + 1e-14;
  try {
    fisher_inverse(RealSymmetricMatrix(f));
    FAIL("expected SingularFisherError");
  } catch (const SingularFisherError& e) {
    CHECK(e.condition_number() > 1e12);
  }
  RMatrix g(2, 2);
  g << 2.0, 0.5, 0.5, 1.0;
  CHECK((fisher_inverse(RealSymmetricMatrix(g)) * g - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("r metrics") {
  const StatisticalModel m = qubit_phase_dephasing();
  const StatisticalModel m2 = tensor_model(m, 2);
  const ParamPoint t = m.point({kQuarterPi, 0.1});
  const RealSymmetricMatrix q = qfi_matrix(m, t).qfi;
  CHECK(r_metric(fisher_bundle(m, t, separable_povm()).fisher, q) == doctest::Approx(2.0).epsilon(1e-12));
  const RealSymmetricMatrix fb = fisher_bundle(m2, t, bell_povm()).fisher;
  const double r = r_metric(fb, q, 2);
  const double want = (1 - 2 * std::exp(0.4)) / (1 - 2 * std::exp(0.2));
  CHECK(r == doctest::Approx(want).epsilon(1e-10));
  // F diagonal here, so the nuisance ratios are plain ratios of diagonals
  CHECK(r_nuisance(fb, q, 0, 2) == doctest::Approx(2 * q(0, 0) / fb(0, 0)).epsilon(1e-12));
  CHECK_THROWS_AS(r_metric(fb, q, 0), UsageError);
}

}
