#include "menos/builtin.hpp"
#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace menos;

namespace {

// Point-source state from the test-side Simpson overlaps.
oracle::CMat simpson_state(const std::vector<double>& t, double x_m, int n_max) {
  const auto cp = oracle::hg_overlaps_simpson(n_max, t[0] + t[1] / 2, x_m);
  const auto cn = oracle::hg_overlaps_simpson(n_max, t[0] - t[1] / 2, x_m);
  const Eigen::Map<const oracle::RVec> p(cp.data(), n_max + 1), n(cn.data(), n_max + 1);
  const oracle::RMat r = t[2] * p * p.transpose() + (1 - t[2]) * n * n.transpose();
  return r.cast<oracle::cplx>();
}

}  // namespace

TEST_SUITE("builtin") {

TEST_CASE("Bell POVM is the projective measurement on the Bell states") {
  const Povm b = bell_povm();
  CHECK(b.size() == 4);
  CHECK(b[0](1, 2).real() == doctest::Approx(0.5));  // Psi+
  CHECK(b[1](1, 2).real() == doctest::Approx(-0.5)); // Psi-
  CHECK(b[2](0, 3).real() == doctest::Approx(0.5));  // Phi+
  for (std::size_t a = 0; a < 4; ++a) CHECK((b[a].matrix() * b[a].matrix() - b[a].matrix()).norm() < 1e-15);
}

TEST_CASE("separable POVM elements are half projectors") {
  const Povm s = separable_povm();
  for (std::size_t a = 0; a < 4; ++a) CHECK(s[a].trace() == doctest::Approx(0.5));
  CHECK(s[2](0, 1) == std::complex<double>(0.0, -0.25));
}

TEST_CASE("HG overlaps: quadrature, closed form and an independent Simpson rule agree") {
  for (double x0 : {-1.2, 0.0, 0.3, 2.0}) {
    const auto ref = oracle::hg_overlaps_simpson(30, x0, 0.25);
    for (int n = 0; n <= 30; ++n) {
      CHECK(std::abs(hg_overlap(n, x0, 0.25) - ref[n]) < 1e-10);
      CHECK(std::abs(hg_overlap_closed_form(n, x0, 0.25) - ref[n]) < 1e-10);
    }
  }
}

TEST_CASE("HG modes are orthonormal up to n = 30") {
  CHECK((hg_gram(30) - RMatrix::Identity(31, 31)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(hg_norm_squared(10) == doctest::Approx(1024.0 * 3628800.0).epsilon(1e-12));
}

TEST_CASE("optimal weights are orthonormal; a corrupted copy is refused") {
  CHECK(weight_orthonormality_residual(optimal_weight_matrix()) < 1e-12);
  PointSourceConfig cfg;
  const Povm p = optimal_povm_point_sources(cfg);
  CHECK(p.size() == 5);
  CHECK(validate_povm(p, kPovmTol).passed);
  Eigen::Matrix4d w = optimal_weight_matrix();
  w(2, 0) += 0.1;
  CHECK(weight_orthonormality_residual(w) > 1e-3);
  CHECK_THROWS_AS(optimal_povm_point_sources(cfg, w), ConstructionError);
}

TEST_CASE("point sources: state matches the Simpson-rule construction") {
  PointSourceConfig cfg;
  cfg.x_m = 0.05;
  const StatisticalModel m = point_source_model(cfg);
  const std::vector<double> t{0.1, 0.4, 0.3};
  const CMatrix rho = m.state_at(m.point(t)).matrix();
  CHECK((rho - simpson_state(t, 0.05, 20)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.state_at(m.point(t)).trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("point sources: analytic derivatives against the central stencil") {
  const ParamPoint t({0.1, 0.3, 0.4}, {"x_c", "dx", "q"});
  const StatisticalModel m = point_source_model_at({}, t);
  const auto a = m.derivatives_at(t);
  const auto n = m.with_finite_differences().derivatives_at(t);
  for (std::size_t j = 0; j < 3; ++j) CHECK((a[j].matrix() - n[j].matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("point sources: Fisher and quantum Fisher information") {
  // x_m = 0, theta = (0, 0.1, 0.5)
  PointSourceConfig cfg;
  cfg.x_m = 0.0;
  const StatisticalModel m = point_source_model(cfg);
  const ParamPoint t({0.0, 0.1, 0.5}, {"x_c", "dx", "q"});
  const Povm hg = optimal_povm_point_sources(cfg);
  const RMatrix f = fisher_bundle(m, t, hg).fisher.matrix();

  std::vector<oracle::CMat> povm;
  for (const auto& e : hg.elements()) povm.push_back(e.matrix());
  auto st = [](const std::vector<double>& x) { return simpson_state(x, 0.0, 20); };
  const RMatrix ref = oracle::fd_fisher(st, {0.0, 0.1, 0.5}, povm, 1e-4);
  CHECK((f - ref).cwiseAbs().maxCoeff() < 1e-6);

  const RMatrix q = qfi_matrix(m, t).qfi.matrix();
  // equal sources: Q_dx,dx = 1/4 for a unit-variance intensity PSF
  CHECK(q(1, 1) == doctest::Approx(0.25).epsilon(1e-9));
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(q(j, j) == doctest::Approx(oracle::bures_qfi_diagonal(st, {0.0, 0.1, 0.5}, j, 1e-3)).epsilon(1e-4));
}

TEST_CASE("point sources: truncation leakage and domain") {
  PointSourceConfig small{6, 0.0};
  const StatisticalModel m = point_source_model(small);
  CHECK_NOTHROW(m.state_at(m.point({0.0, 0.01, 0.5})));
  CHECK_THROWS_AS(m.state_at(m.point({3.0, 0.5, 0.5})), ConstructionError);
  CHECK_THROWS_AS(m.state_at(m.point({0.0, -0.1, 0.5})), DomainError);
  CHECK_THROWS_AS(m.state_at(m.point({0.0, 0.1, 1.0})), DomainError);
  CHECK_THROWS_AS(point_source_model(PointSourceConfig{}), UsageError);
}

TEST_CASE("point sources: converged in n_max") {
  const ParamPoint t({0.0, 0.2, 0.3}, {"x_c", "dx", "q"});
  PointSourceConfig a{20, x_opt(t)}, b{30, x_opt(t)};
  const RMatrix fa = fisher_bundle(point_source_model(a), t, optimal_povm_point_sources(a)).fisher.matrix();
  const RMatrix fb = fisher_bundle(point_source_model(b), t, optimal_povm_point_sources(b)).fisher.matrix();
  CHECK((fa - fb).cwiseAbs().maxCoeff() < 1e-8 * fb.cwiseAbs().maxCoeff());
  CHECK(x_opt(t) == doctest::Approx(-0.04));
}

}
