#include "menos/builtin.hpp"
#include "menos/oracle.hpp"
#include "menos/random.hpp"
#include "menos/susceptibility.hpp"

#include <doctest.h>

#include <numbers>

using namespace menos;

TEST_SUITE("oracle") {

TEST_CASE("parallel and serial searches return the same candidate") {
  for (int i = 0; i < 4; ++i) {
    const RandomInstance r = random_instance(9, i);
    const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
    const NoiseFunctional nf(a_tensor(b, r.derivatives, r.rho), b.fisher);
    const OracleResult s = noise_search_oracle_serial(nf, 3000, 123);
    const OracleResult p = noise_search_oracle(nf, 3000, 123, 4);
    CHECK(s.best_x == p.best_x);
    CHECK(s.best_candidate == p.best_candidate);
    CHECK(s.evaluated == 3000 + s.structured_candidates);
  }
}

TEST_CASE("a different seed changes the random candidates only") {
  const RandomInstance r = random_instance(9, 1);
  const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
  const NoiseFunctional nf(a_tensor(b, r.derivatives, r.rho), b.fisher);
  const OracleResult a = noise_search_oracle_serial(nf, 0, 1);
  const OracleResult c = noise_search_oracle_serial(nf, 0, 2);
  CHECK(a.best_x == c.best_x);
  const OracleResult d = noise_search_oracle_serial(nf, 50, 1), e = noise_search_oracle_serial(nf, 50, 1);
  CHECK(d.best_x == e.best_x);
}

TEST_CASE("the reported noise is a POVM and reproduces best_x") {
  for (int i = 0; i < 6; ++i) {
    const RandomInstance r = random_instance(14, i);
    const OracleResult o = noise_search_oracle(r.rho, r.derivatives, r.povm, 2000, 5);
    CHECK(validate_povm(o.best_noise, 1e-9).passed);
    CHECK(o.best_noise.size() == r.povm.size());
    const FisherBundle b = fisher_bundle(r.rho, r.derivatives, r.povm);
    const double x = x_scalar(b.fisher, g_matrix(a_tensor(b, r.derivatives, r.rho), o.best_noise), r.derivatives.size());
    CHECK(x == doctest::Approx(o.best_x).epsilon(1e-9));
  }
}

TEST_CASE("structured candidates already reach the best two-outcome value") {
  for (int i = 0; i < 6; ++i) {
    const RandomInstance r = random_instance(15, i);
    const SusceptibilityReport s = susceptibility_report(r.rho, r.derivatives, r.povm);
    const OracleResult o = noise_search_oracle(r.rho, r.derivatives, r.povm, 500, 3);
    CHECK(o.best_x == doctest::Approx(s.two_outcome_best).epsilon(1e-9));
    CHECK(o.best_candidate < o.structured_candidates);
  }
}

TEST_CASE("no random noise beats the upper bound") {
  for (int i = 0; i < 10; ++i) {
    const RandomInstance r = random_instance(16, i);
    const SusceptibilityReport s = susceptibility_report(r.rho, r.derivatives, r.povm);
    const OracleResult o = noise_search_oracle(r.rho, r.derivatives, r.povm, 2000, 8);
    CHECK(o.best_x <= s.sigma_upper + 1e-9);
  }
}

TEST_CASE("qubit: the oracle finds the separable lower bound value") {
  const StatisticalModel m = qubit_phase_dephasing();
  const ParamPoint t = m.point({std::numbers::pi / 4, 0.1});
  const SusceptibilityReport s = susceptibility_report(m, t, separable_povm());
  const OracleResult o = noise_search_oracle(m, t, separable_povm(), 1000, 1);
  CHECK(o.best_x == doctest::Approx(s.sigma_lower).epsilon(1e-9));
}

TEST_CASE("Haar unitaries are unitary; random POVMs are valid") {
  Rng rng = stream_rng(4, 4);
  for (int d = 1; d <= 6; ++d) {
    const CMatrix u = haar_unitary(d, rng);
    CHECK((u.adjoint() * u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(validate_povm(random_povm(d, 5, rng), 1e-9).passed);
  }
}

}
