#pragma once

#include "menos/linalg.hpp"
#include "menos/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace menos {

using Rng = std::mt19937_64;

// Independent stream for (seed, index); the same pair always gives the same stream.
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

// Haar-distributed unitary (QR of a complex Ginibre matrix, phases fixed).
CMatrix haar_unitary(Eigen::Index dim, Rng& rng);

// Full-rank density matrix G G^dagger / Tr, G complex Ginibre.
HermitianOperator random_density_matrix(Eigen::Index dim, Rng& rng);

// Traceless Hermitian with Gaussian entries of scale `scale`.
HermitianOperator random_traceless_hermitian(Eigen::Index dim, Rng& rng, double scale = 1.0);

// E-outcome POVM: G_a = Ginibre, S = sum G_a G_a^dagger, M_a = S^-1/2 G_a G_a^dagger S^-1/2.
Povm random_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng);

// Two-outcome noise N_1 = U diag(u) U^dagger, N_2 = I - N_1, with u uniform in [0,1].
CMatrix random_effect(Eigen::Index dim, Rng& rng);

/// A random (state, tangent, POVM) triple with a well conditioned Fisher matrix.
struct RandomInstance {
  HermitianOperator rho;
  std::vector<HermitianOperator> derivatives;
  Povm povm;
};

// dim in [2, 4], P in [2, 3], outcomes in [P + 1, 6]; resampled (deterministically)
// until cond(F) < 1e6 and every outcome has p > 1e-6.
RandomInstance random_instance(std::uint64_t seed, std::uint64_t index);

}  // namespace menos
