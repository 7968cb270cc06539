#include "menos/oracle.hpp"

#include "menos/errors.hpp"
#include "menos/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <random>
#include <utility>
#include <vector>

namespace menos {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> kept_pairs(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) out.emplace_back(a, b);
  return out;
}

struct Candidate {
  std::size_t pa, pb;
  CMatrix effect;
};

Candidate make_candidate(const NoiseFunctional& x, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         std::size_t index, std::uint64_t seed) {
  if (index < pairs.size()) {
    const auto [pa, pb] = pairs[index];
    return {pa, pb, x.best_pair_effect(pa, pb).second};
  }
  Rng rng = stream_rng(seed, index);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  const auto [pa, pb] = pairs[pick(rng)];
  return {pa, pb, random_effect(x.dim(), rng)};
}

double candidate_value(const NoiseFunctional& x, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       std::size_t index, std::uint64_t seed) {
  if (index < pairs.size()) return x.best_pair_effect(pairs[index].first, pairs[index].second).first;
  const Candidate c = make_candidate(x, pairs, index, seed);
  return x.evaluate_pair(c.pa, c.pb, c.effect);
}

OracleResult finish(const NoiseFunctional& x, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                    const std::vector<double>& values, std::uint64_t seed) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  const Candidate c = make_candidate(x, pairs, best, seed);
  const Eigen::Index dim = x.dim();
  std::vector<HermitianOperator> els(x.num_outcomes(), HermitianOperator::zero(dim));
  els[x.outcomes()[c.pa]] = HermitianOperator(c.effect, 1e-9);
  els[x.outcomes()[c.pb]] = HermitianOperator(CMatrix::Identity(dim, dim) - c.effect, 1e-9);
  return OracleResult{values[best], Povm(std::move(els)), best, pairs.size(), values.size()};
}

void check_inputs(const NoiseFunctional& x) {
  if (x.outcomes().size() < 2) throw UsageError("noise search needs at least two kept outcomes");
}

}  // namespace

OracleResult noise_search_oracle_serial(const NoiseFunctional& x, std::size_t samples, std::uint64_t seed) {
  check_inputs(x);
  const auto pairs = kept_pairs(x.outcomes().size());
  std::vector<double> values(pairs.size() + samples);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = candidate_value(x, pairs, i, seed);
  return finish(x, pairs, values, seed);
}

OracleResult noise_search_oracle(const NoiseFunctional& x, std::size_t samples, std::uint64_t seed, int workers) {
  if (workers == 1) return noise_search_oracle_serial(x, samples, seed);
  check_inputs(x);
  const auto pairs = kept_pairs(x.outcomes().size());
  std::vector<double> values(pairs.size() + samples);
  const auto n = static_cast<long long>(values.size());
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (long long i = 0; i < n; ++i)
    values[static_cast<std::size_t>(i)] = candidate_value(x, pairs, static_cast<std::size_t>(i), seed);
  return finish(x, pairs, values, seed);
}

OracleResult noise_search_oracle(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                                 const Povm& target, std::size_t samples, std::uint64_t seed, int workers,
                                 const SusceptibilityOptions& options) {
  const FisherBundle b = fisher_bundle(rho, derivatives, target, options.p_cutoff);
  const NoiseFunctional x(a_tensor(b, derivatives, rho), b.fisher, options.max_condition);
  return noise_search_oracle(x, samples, seed, workers);
}

OracleResult noise_search_oracle(const StatisticalModel& model, const ParamPoint& theta, const Povm& target,
                                 std::size_t samples, std::uint64_t seed, int workers,
                                 const SusceptibilityOptions& options) {
  return noise_search_oracle(model.state_at(theta), model.derivatives_at(theta), target, samples, seed, workers,
                             options);
}

}  // namespace menos
