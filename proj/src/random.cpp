#include "menos/random.hpp"

#include "menos/fisher.hpp"

#include <algorithm>
#include <cmath>

namespace menos {

Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of the pair, so neighbouring indices give unrelated streams
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + (index + 1) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  std::seed_seq seq{static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(seed)};
  return Rng(seq);
}

namespace {

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

CMatrix inverse_sqrt(const HermitianOperator& s) {
  const HermitianEigen e = eig_hermitian(s);
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

CMatrix haar_unitary(Eigen::Index dim, Rng& rng) {
  const CMatrix z = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

HermitianOperator random_density_matrix(Eigen::Index dim, Rng& rng) {
  const CMatrix g = ginibre(dim, dim, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return HermitianOperator(rho, 1e-9);
}

HermitianOperator random_traceless_hermitian(Eigen::Index dim, Rng& rng, double scale) {
  const CMatrix g = ginibre(dim, dim, rng);
  CMatrix h = (g + g.adjoint()) * (0.5 * scale);
  h -= (h.trace() / static_cast<double>(dim)) * CMatrix::Identity(dim, dim);
  return HermitianOperator(h, 1e-9);
}

Povm random_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng) {
  std::vector<CMatrix> raw;
  CMatrix s = CMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < outcomes; ++a) {
    const CMatrix g = ginibre(dim, dim, rng);
    raw.push_back(g * g.adjoint());
    s += raw.back();
  }
  const CMatrix w = inverse_sqrt(HermitianOperator(s, 1e-9));
  std::vector<HermitianOperator> els;
  for (const auto& r : raw) els.emplace_back(w * r * w, 1e-9);
  return Povm(std::move(els));
}

CMatrix random_effect(Eigen::Index dim, Rng& rng) {
  const CMatrix u = haar_unitary(dim, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RVector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = unif(rng);
  return u * d.cast<cplx>().asDiagonal() * u.adjoint();
}

RandomInstance random_instance(std::uint64_t seed, std::uint64_t index) {
  Rng rng = stream_rng(seed ^ 0x5eedULL, index);
  std::uniform_int_distribution<int> pick_dim(2, 4), pick_p(2, 3);
  for (;;) {
    const Eigen::Index dim = pick_dim(rng);
    const int p = pick_p(rng);
    std::uniform_int_distribution<int> pick_e(p + 1, 6);
    const auto e = static_cast<std::size_t>(pick_e(rng));
    HermitianOperator rho = random_density_matrix(dim, rng);
    std::vector<HermitianOperator> d;
    for (int j = 0; j < p; ++j) d.push_back(random_traceless_hermitian(dim, rng, 0.3));
    Povm m = random_povm(dim, e, rng);
    const FisherBundle b = fisher_bundle(rho, d, m);
    const bool probs_ok = std::all_of(b.probabilities.begin(), b.probabilities.end(),
                                      [](double x) { return x > 1e-6; });
    if (probs_ok && condition_number(b.fisher) < 1e6)
      return RandomInstance{std::move(rho), std::move(d), std::move(m)};
  }
}

}  // namespace menos
