#include "menos/builtin.hpp"
#include "menos/errors.hpp"
#include "menos/fisher.hpp"
#include "menos/random.hpp"
#include "menos/susceptibility.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace menos;

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

std::vector<oracle::CMat> raw(const Povm& p) {
  std::vector<oracle::CMat> out;
  for (const auto& e : p.elements()) out.push_back(e.matrix());
  return out;
}
std::vector<oracle::CMat> raw(const std::vector<HermitianOperator>& v) {
  std::vector<oracle::CMat> out;
  for (const auto& e : v) out.push_back(e.matrix());
  return out;
}

double x_of(const RandomInstance& r, const Povm& n) {
  const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
  return x_scalar(b.fisher, g_matrix(a_tensor(b, r.derivatives, r.rho), n), r.derivatives.size());
}

}  // namespace

TEST_SUITE("susceptibility") {

TEST_CASE("no noise, no loss: X[M, M] = 0") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(8, i);
    CHECK(std::abs(x_of(r, r.povm)) < 1e-9);
  }
  const StatisticalModel m = qubit_phase_dephasing();
  const ParamPoint t = m.point({kQuarterPi, 0.2});
  const FisherBundle b = fisher_bundle(m, t, separable_povm());
  // G[M] = -F[M], so Xi[M, M] vanishes identically
  const RealSymmetricMatrix g = g_matrix(a_tensor(b, m.derivatives_at(t), m.state_at(t)), separable_povm());
  CHECK((g.matrix() + b.fisher.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(xi_matrix(b.fisher, g).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("X is the first-order rate of the determinant loss") {
  // Richardson on the oracle quotient removes its O(eps) term.
  for (int i = 0; i < 8; ++i) {
    const RandomInstance r = random_instance(21, i);
    Rng rng = stream_rng(77, i);
    const Povm n = random_povm(r.rho.dim(), r.povm.size(), rng);
    const double x = x_of(r, n);
    const auto rho = r.rho.matrix();
    const auto d = raw(r.derivatives);
    const double q1 = oracle::det_quotient(rho, d, raw(r.povm), raw(n), 1e-4);
    const double q2 = oracle::det_quotient(rho, d, raw(r.povm), raw(n), 5e-5);
    CHECK(2 * q2 - q1 == doctest::Approx(x).epsilon(1e-6));
    // library quotient takes the same route through mix_povm
    CHECK(x_finite_epsilon(r.rho, r.derivatives, r.povm, n, 1e-4) == doctest::Approx(q1).epsilon(1e-9));
  }
}

TEST_CASE("trace of Xi, convex-sum form and linear functional all give X") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(4, i);
    Rng rng = stream_rng(5, i);
    const Povm n = random_povm(r.rho.dim(), r.povm.size(), rng);
    const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
    const ATensor a = a_tensor(b, r.derivatives, r.rho);
    const RealSymmetricMatrix g = g_matrix(a, n);
    const double x = x_scalar(b.fisher, g, r.derivatives.size());
    CHECK(xi_matrix(b.fisher, g).trace() == doctest::Approx(x).epsilon(1e-10));
    const DiagonalizedFrame fr = diagonalize_frame(b, r.derivatives, r.rho);
    CHECK(x_convex_sum(fr, r.rho, n) == doctest::Approx(x).epsilon(1e-9));
    CHECK(NoiseFunctional(a, b.fisher).evaluate(n) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("X does not depend on the chart") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(6, i);
    Rng rng = stream_rng(6, 100 + i);
    const Povm n = random_povm(r.rho.dim(), r.povm.size(), rng);
    const auto p = static_cast<Eigen::Index>(r.derivatives.size());
    RMatrix k = RMatrix::Identity(p, p) * 1.5;
    k(0, p - 1) = -0.8;
    k(p - 1, 0) = 0.3;
    RandomInstance s{r.rho, transform_derivatives(r.derivatives, k), r.povm};
    CHECK(x_of(s, n) == doctest::Approx(x_of(r, n)).epsilon(1e-8));
  }
}

TEST_CASE("diagonal frame: F~ diagonal and tr[F^-1 G] = sum_j G~_jj / F~_jj") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(12, i);
    Rng rng = stream_rng(12, 50 + i);
    const Povm n = random_povm(r.rho.dim(), r.povm.size(), rng);
    const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
    const DiagonalizedFrame fr = diagonalize_frame(b, r.derivatives, r.rho);
    const RMatrix& j = fr.jacobian;
    const RMatrix ft = j * b.fisher.matrix() * j.transpose();
    RMatrix off = ft;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() < 1e-9 * ft.diagonal().maxCoeff());

    const RealSymmetricMatrix g = g_matrix(a_tensor(b, r.derivatives, r.rho), n);
    const RMatrix gt = j * g.matrix() * j.transpose();
    double s = 0;
    for (Eigen::Index k = 0; k < gt.rows(); ++k) s += gt(k, k) / fr.tilde_fisher(k);
    CHECK(s == doctest::Approx(x_scalar(b.fisher, g, r.derivatives.size()) - r.derivatives.size()).epsilon(1e-9));
    // and directly from the transformed A tensor
    const RealSymmetricMatrix gt2 = g_matrix(fr.tilde_a, n);
    CHECK((gt2.matrix() - gt).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, gt.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("A~ from the transformation rule equals A built from tilde scores") {
  const RandomInstance r = random_instance(13, 3);
  const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
  const DiagonalizedFrame fr = diagonalize_frame(b, r.derivatives, r.rho);
  const std::size_t p = r.derivatives.size();
  for (std::size_t pos = 0; pos < fr.kept.size(); ++pos) {
    const auto row = static_cast<Eigen::Index>(fr.kept[pos]);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < p; ++k) {
        const double li = fr.tilde_scores(row, i), lk = fr.tilde_scores(row, k);
        const HermitianOperator direct =
            li * lk * r.rho - li * fr.tilde_derivatives[k] - lk * fr.tilde_derivatives[i];
        CHECK((direct.matrix() - fr.tilde_a.at(pos, i, k).matrix()).cwiseAbs().maxCoeff() < 1e-10);
      }
  }
}

TEST_CASE("canonical frame: diagonal F keeps the original axes") {
  RMatrix f(3, 3);
  f << 2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.5;
  CHECK((canonical_jacobian(RealSymmetricMatrix(f)) - RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  RMatrix g(2, 2);
  g << 1.0, 0.3, 0.3, 2.0;
  const RMatrix j = canonical_jacobian(RealSymmetricMatrix(g));
  CHECK((j * j.transpose() - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(j(0, 0) > 0.0);
  CHECK(j(1, 1) > 0.0);
}

TEST_CASE("degenerate F: X is frame independent, the bounds are not") {
  // separable qubit measurement at phi = pi/4 has F proportional to I
  const StatisticalModel m = qubit_phase_dephasing();
  const ParamPoint t = m.point({kQuarterPi, 1e-3});
  const HermitianOperator rho = m.state_at(t);
  const auto d = m.derivatives_at(t);
  const FisherBundle b = fisher_bundle(rho, d, separable_povm());
  const double c = std::cos(kQuarterPi), s = std::sin(kQuarterPi);
  RMatrix rot(2, 2);
  rot << c, s, -s, c;
  const DiagonalizedFrame canon = diagonalize_frame(b, d, rho);
  const DiagonalizedFrame turned = frame_from_jacobian(b, d, rho, rot);
  CHECK((canon.jacobian - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng = stream_rng(1, 2);
  const Povm n = random_povm(2, 4, rng);
  CHECK(x_convex_sum(canon, rho, n) == doctest::Approx(x_convex_sum(turned, rho, n)).epsilon(1e-10));

  // values from an independent numpy implementation of the bound formulas
  CHECK(sigma_lower(canon).value == doctest::Approx(18.450407618).epsilon(1e-9));
  CHECK(sigma_upper(canon).value == doctest::Approx(21.2760161864).epsilon(1e-9));
  CHECK(sigma_lower(turned).value == doctest::Approx(30.7566444051).epsilon(1e-9));
  CHECK(sigma_upper(turned).value == doctest::Approx(31.8138411686).epsilon(1e-9));
}

TEST_CASE("frame_from_jacobian rejects a J that does not diagonalize F") {
  const RandomInstance r = random_instance(3, 0);
  const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
  const auto p = static_cast<Eigen::Index>(r.derivatives.size());
  RMatrix j = RMatrix::Identity(p, p);
  j(0, 1) = 0.5;
  CHECK_THROWS_AS(frame_from_jacobian(b, r.derivatives, r.rho, j), UsageError);
}

TEST_CASE("bounds of the qubit measurements") {
  const StatisticalModel m = qubit_phase_dephasing();
  const StatisticalModel m2 = tensor_model(m, 2);
  const ParamPoint lo = m.point({kQuarterPi, 1e-3}), hi = m.point({kQuarterPi, 0.1});
  const SusceptibilityReport a = susceptibility_report(m2, lo, bell_povm());
  CHECK(a.sigma_lower == doctest::Approx(2006.73243237).epsilon(1e-9));
  CHECK(a.sigma_upper == doctest::Approx(2008.83401057).epsilon(1e-9));
  const SusceptibilityReport b = susceptibility_report(m2, hi, bell_povm());
  CHECK(b.sigma_lower == doctest::Approx(26.8041646649).epsilon(1e-9));
  CHECK(b.sigma_upper == doctest::Approx(29.4121951721).epsilon(1e-9));
  const SusceptibilityReport c = susceptibility_report(m, hi, separable_povm());
  CHECK(c.sigma_lower == doctest::Approx(15.743557747).epsilon(1e-9));
  CHECK(c.sigma_upper == doctest::Approx(18.3658113619).epsilon(1e-9));
  CHECK(c.per_parameter_sigmas.size() == 2);
}

TEST_CASE("pair diagnostic never exceeds the printed lower bound") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(31, i);
    const SusceptibilityReport s = susceptibility_report(r.rho, r.derivatives, r.povm);
    CHECK(s.pair_attained <= s.sigma_lower + 1e-9);
    CHECK(s.pair_attained <= s.two_outcome_best + 1e-12);
    const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
    const NoiseFunctional nf(a_tensor(b, r.derivatives, r.rho), b.fisher);
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k < b.kept.size(); ++k) {
      if (b.kept[k] == s.best_pair.first) ia = k;
      if (b.kept[k] == s.best_pair.second) ib = k;
    }
    CHECK(nf.best_pair_effect(ia, ib).first == doctest::Approx(s.pair_attained).epsilon(1e-9));
  }
}

TEST_CASE("single parameter: sigma formula and collapse of the bounds") {
  // rho = I/2, d rho = c sigma_z, computational basis: sigma = 4 for any c
  CVector e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  const Povm comp({HermitianOperator::projector(e0), HermitianOperator::projector(e1)});
  for (double c : {0.1, 0.37}) {
    CMatrix z(2, 2);
    z << c, 0.0, 0.0, -c;
    const HermitianOperator rho = 0.5 * HermitianOperator::identity(2);
    CHECK(sigma_single(rho, HermitianOperator(z), comp) == doctest::Approx(4.0).epsilon(1e-14));
    const SusceptibilityReport s = susceptibility_report(rho, {HermitianOperator(z)}, comp);
    CHECK(s.sigma_lower == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(s.sigma_upper == doctest::Approx(4.0).epsilon(1e-14));
  }
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(17, i);
    const SusceptibilityReport s = susceptibility_report(r.rho, {r.derivatives[0]}, r.povm);
    const double sig = sigma_single(r.rho, r.derivatives[0], r.povm);
    CHECK(s.sigma_lower == doctest::Approx(sig).epsilon(1e-10));
    CHECK(s.sigma_upper == doctest::Approx(sig).epsilon(1e-10));
  }
  CHECK_THROWS_AS(sigma_single(qubit_phase_dephasing(), qubit_phase_dephasing().point({0.1, 0.2}), separable_povm()),
                  UsageError);
}

TEST_CASE("noise alignment: padding is free, uncovered outcomes are rejected") {
  const RandomInstance r = random_instance(2, 5);
  Rng rng = stream_rng(2, 5);
  const Povm n = random_povm(r.rho.dim(), r.povm.size(), rng);
  CHECK(x_of(r, n.padded(n.size() + 2)) == doctest::Approx(x_of(r, n)).epsilon(1e-14));
  const Povm extra = random_povm(r.rho.dim(), r.povm.size() + 1, rng);
  CHECK_THROWS_AS(x_of(r, extra), OutcomeMismatchError);

  // a dropped target outcome cannot carry noise either
  CMatrix p0(2, 2);
  p0 << 1.0, 0.0, 0.0, 0.0;
  CMatrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  CVector e0(2), e1(2), e2(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  const Povm comp({HermitianOperator::projector(e0), HermitianOperator::projector(e1)});
  const FisherBundle b = fisher_bundle(HermitianOperator(p0), {HermitianOperator(x)}, comp);
  const ATensor a = a_tensor(b, {HermitianOperator(x)}, HermitianOperator(p0));
  CHECK_THROWS_AS(g_matrix(a, separable_povm()), OutcomeMismatchError);
}

TEST_CASE("outcome relabeling does not move the bounds") {
  for (int i = 0; i < 5; ++i) {
    const RandomInstance r = random_instance(40, i);
    std::vector<std::size_t> perm(r.povm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = (k + 2) % perm.size();
    const SusceptibilityReport a = susceptibility_report(r.rho, r.derivatives, r.povm);
    const SusceptibilityReport b = susceptibility_report(r.rho, r.derivatives, r.povm.permuted(perm));
    CHECK(a.sigma_lower == doctest::Approx(b.sigma_lower).epsilon(1e-10));
    CHECK(a.sigma_upper == doctest::Approx(b.sigma_upper).epsilon(1e-10));
  }
}

TEST_CASE("fewer than two informative outcomes is a usage error") {
  const StatisticalModel m = qubit_phase_dephasing();
  const Povm trivial({HermitianOperator::identity(2)});
  CHECK_THROWS_AS(susceptibility_report(m, m.point({0.1, 0.2}), trivial), Error);
}

}
