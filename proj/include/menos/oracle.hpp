#pragma once

#include "menos/model.hpp"
#include "menos/susceptibility.hpp"

#include <cstddef>
#include <cstdint>

namespace menos {

/// Best X found by the noise search, and the noise attaining it.
///
/// Candidates are indexed: first the structured ones (for every kept pair, the
/// two-outcome projector onto the positive part of B_a - B_b, which is the
/// exact optimum on that pair), then `samples` random two-outcome noises
/// N_a = U diag(u) U^dagger, N_b = I - N_a on a random pair. Candidate i draws
/// from stream_rng(seed, i) only, so the result does not depend on threading.
struct OracleResult {
  double best_x;
  Povm best_noise;
  std::size_t best_candidate;
  std::size_t structured_candidates;
  std::size_t evaluated;
};

// workers: 0 = OpenMP default, 1 = run on the calling thread.
OracleResult noise_search_oracle(const NoiseFunctional& x, std::size_t samples, std::uint64_t seed,
                                 int workers = 0);
// Plain loop, kept as the reference for the parallel version.
OracleResult noise_search_oracle_serial(const NoiseFunctional& x, std::size_t samples, std::uint64_t seed);

OracleResult noise_search_oracle(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                                 const Povm& target, std::size_t samples, std::uint64_t seed, int workers = 0,
                                 const SusceptibilityOptions& options = {});
OracleResult noise_search_oracle(const StatisticalModel& model, const ParamPoint& theta, const Povm& target,
                                 std::size_t samples, std::uint64_t seed, int workers = 0,
                                 const SusceptibilityOptions& options = {});

}  // namespace menos
