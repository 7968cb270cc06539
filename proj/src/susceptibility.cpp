#include "menos/susceptibility.hpp"

#include "menos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace menos {

ATensor::ATensor(std::size_t num_outcomes, std::size_t num_params, std::vector<std::size_t> outcomes,
                 std::vector<std::vector<HermitianOperator>> blocks)
    : num_outcomes_(num_outcomes),
      num_params_(num_params),
      outcomes_(std::move(outcomes)),
      blocks_(std::move(blocks)) {
  if (outcomes_.size() != blocks_.size()) throw UsageError("ATensor: one block per kept outcome");
  for (const auto& b : blocks_)
    if (b.size() != num_params_ * num_params_) throw UsageError("ATensor: block must hold P*P operators");
  if (!std::is_sorted(outcomes_.begin(), outcomes_.end())) throw UsageError("ATensor: outcomes must ascend");
  if (!outcomes_.empty() && outcomes_.back() >= num_outcomes_)
    throw UsageError("ATensor: outcome index out of range");
}

std::optional<std::size_t> ATensor::position(std::size_t outcome) const {
  auto it = std::lower_bound(outcomes_.begin(), outcomes_.end(), outcome);
  if (it == outcomes_.end() || *it != outcome) return std::nullopt;
  return static_cast<std::size_t>(it - outcomes_.begin());
}

namespace {

std::vector<HermitianOperator> a_block(const RMatrix& scores, Eigen::Index row,
                                       const std::vector<HermitianOperator>& derivs,
                                       const HermitianOperator& rho) {
  const std::size_t p = derivs.size();
  std::vector<HermitianOperator> block;
  block.reserve(p * p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k) {
      const double lj = scores(row, static_cast<Eigen::Index>(j));
      const double lk = scores(row, static_cast<Eigen::Index>(k));
      block.push_back(lj * lk * rho - lj * derivs[k] - lk * derivs[j]);
    }
  return block;
}

// Weight of noise element `outcome`, after checking it is allowed to have any.
bool noise_has_weight(const HermitianOperator& n) { return n.max_abs() > 1e-12; }

void check_noise_support(const Povm& noise, std::size_t target_outcomes,
                         const std::vector<std::size_t>& kept, Eigen::Index dim) {
  if (noise.dim() != dim) throw UsageError("noise POVM dimension differs from the state");
  for (std::size_t a = 0; a < noise.size(); ++a) {
    if (!noise_has_weight(noise[a])) continue;
    if (a >= target_outcomes) {
      std::ostringstream os;
      os << "noise outcome " << a << " has no counterpart in the " << target_outcomes << "-outcome target POVM";
      throw OutcomeMismatchError(os.str());
    }
    if (!std::binary_search(kept.begin(), kept.end(), a)) {
      std::ostringstream os;
      os << "noise outcome " << a << " sits on a target outcome dropped for vanishing probability";
      throw OutcomeMismatchError(os.str());
    }
  }
}

// Tr[X Y] for square complex matrices.
double trace_of_product(const CMatrix& x, const CMatrix& y) {
  return x.cwiseProduct(y.transpose()).sum().real();
}

void require_two_kept(const std::vector<std::size_t>& kept) {
  if (kept.size() < 2) throw UsageError("susceptibility needs at least two outcomes with nonzero probability");
}

}  // namespace

ATensor a_tensor(const FisherBundle& bundle, const std::vector<HermitianOperator>& derivatives,
                 const HermitianOperator& rho) {
  if (derivatives.size() != bundle.num_params()) throw UsageError("a_tensor: parameter count mismatch");
  std::vector<std::vector<HermitianOperator>> blocks;
  blocks.reserve(bundle.kept.size());
  for (std::size_t a : bundle.kept)
    blocks.push_back(a_block(bundle.scores, static_cast<Eigen::Index>(a), derivatives, rho));
  return ATensor(bundle.num_outcomes(), bundle.num_params(), bundle.kept, std::move(blocks));
}

RealSymmetricMatrix g_matrix(const ATensor& a, const Povm& noise) {
  const auto p = static_cast<Eigen::Index>(a.num_params());
  if (a.outcomes().empty()) throw UsageError("g_matrix: empty tensor");
  check_noise_support(noise, a.num_outcomes(), a.outcomes(), a.at(0, 0, 0).dim());
  RMatrix g = RMatrix::Zero(p, p);
  for (std::size_t pos = 0; pos < a.outcomes().size(); ++pos) {
    const std::size_t out = a.outcomes()[pos];
    if (out >= noise.size()) break;
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = j; k < p; ++k) {
        const double v = a.at(pos, static_cast<std::size_t>(j), static_cast<std::size_t>(k)).trace_product(noise[out]);
        g(j, k) += v;
        if (k != j) g(k, j) += v;
      }
  }
  return RealSymmetricMatrix(g);
}

RMatrix xi_matrix(const RealSymmetricMatrix& f, const RealSymmetricMatrix& g, double max_condition) {
  if (f.dim() != g.dim()) throw UsageError("xi_matrix: F and G differ in size");
  return RMatrix::Identity(f.dim(), f.dim()) + fisher_inverse(f, max_condition) * g.matrix();
}

double x_scalar(const RealSymmetricMatrix& f, const RealSymmetricMatrix& g, std::size_t num_params,
                double max_condition) {
  if (f.dim() != g.dim() || static_cast<std::size_t>(f.dim()) != num_params)
    throw UsageError("x_scalar: size mismatch");
  // both symmetric: tr[F^-1 G] = sum_jk (F^-1)_jk G_jk
  return static_cast<double>(num_params) + fisher_inverse(f, max_condition).cwiseProduct(g.matrix()).sum();
}

double x_finite_epsilon(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                        const Povm& target, const Povm& noise, double eps, double p_cutoff) {
  if (!(eps > 0.0 && eps <= 1.0)) throw UsageError("x_finite_epsilon: eps must lie in (0, 1]");
  const double d0 = fisher_bundle(rho, derivatives, target, p_cutoff).fisher.matrix().determinant();
  if (!(d0 > 0.0)) throw SingularFisherError("x_finite_epsilon: det F[M] is not positive", INFINITY);
  const double d1 = fisher_bundle(rho, derivatives, mix_povm(target, noise, eps), p_cutoff).fisher.matrix().determinant();
  return (d0 - d1) / (eps * d0);
}

double sigma_single(const HermitianOperator& rho, const HermitianOperator& derivative, const Povm& target,
                    double p_cutoff) {
  const std::vector<HermitianOperator> derivs{derivative};
  const FisherBundle b = fisher_bundle(rho, derivs, target, p_cutoff);
  require_two_kept(b.kept);
  const double f = b.fisher(0, 0);
  if (!(f > 0.0)) throw SingularFisherError("sigma_single: Fisher information vanishes", INFINITY);
  std::size_t n = b.kept.front(), m = n;
  for (std::size_t a : b.kept) {
    if (b.scores(static_cast<Eigen::Index>(a), 0) > b.scores(static_cast<Eigen::Index>(n), 0)) n = a;
    if (b.scores(static_cast<Eigen::Index>(a), 0) < b.scores(static_cast<Eigen::Index>(m), 0)) m = a;
  }
  const double ln = b.scores(static_cast<Eigen::Index>(n), 0);
  const double lm = b.scores(static_cast<Eigen::Index>(m), 0);
  const HermitianOperator an = ln * ln * rho - 2.0 * ln * derivative;
  const HermitianOperator am = lm * lm * rho - 2.0 * lm * derivative;
  return 1.0 + (ln * ln + lm * lm + trace_norm(an - am)) / (2.0 * f);
}

double sigma_single(const StatisticalModel& model, const ParamPoint& theta, const Povm& target, double p_cutoff) {
  if (model.num_params() != 1) throw UsageError("sigma_single: model has more than one parameter");
  return sigma_single(model.state_at(theta), model.derivatives_at(theta).front(), target, p_cutoff);
}

RMatrix canonical_jacobian(const RealSymmetricMatrix& f) {
  const SymmetricEigen eig = eig_symmetric(f);
  const Eigen::Index p = f.dim();
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1e-300);

  std::vector<RVector> dirs;
  Eigen::Index start = 0;
  while (start < p) {
    Eigen::Index end = start + 1;
    while (end < p && std::abs(eig.values(end) - eig.values(start)) <= 1e-9 * scale) ++end;
    const Eigen::Index g = end - start;
    if (g == 1) {
      dirs.push_back(eig.vectors.col(start));
    } else {
      const RMatrix basis = eig.vectors.middleCols(start, g);
      const RMatrix proj = basis * basis.transpose();
      std::vector<RVector> group;
      for (Eigen::Index k = 0; k < p && static_cast<Eigen::Index>(group.size()) < g; ++k) {
        RVector u = proj.col(k);
        for (const auto& v : group) u -= v.dot(u) * v;
        for (const auto& v : group) u -= v.dot(u) * v;  // second pass for stability
        const double nrm = u.norm();
        if (nrm > 1e-6) group.push_back(u / nrm);
      }
      if (static_cast<Eigen::Index>(group.size()) != g)
        throw UsageError("canonical_jacobian: degenerate eigenspace lost rank");
      dirs.insert(dirs.end(), group.begin(), group.end());
    }
    start = end;
  }

  std::vector<Eigen::Index> dominant(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double top = dirs[i].cwiseAbs().maxCoeff();
    Eigen::Index idx = 0;
    while (std::abs(dirs[i](idx)) < top - 1e-12) ++idx;
    if (dirs[i](idx) < 0) dirs[i] = -dirs[i];
    dominant[i] = idx;
  }
  std::vector<std::size_t> order(dirs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dominant[a] < dominant[b]; });

  RMatrix j(p, p);
  for (Eigen::Index r = 0; r < p; ++r) j.row(r) = dirs[order[static_cast<std::size_t>(r)]].transpose();
  return j;
}

DiagonalizedFrame frame_from_jacobian(const FisherBundle& bundle, const std::vector<HermitianOperator>& derivatives,
                                      const HermitianOperator& rho, const RMatrix& jacobian,
                                      double max_condition) {
  const auto p = static_cast<Eigen::Index>(bundle.num_params());
  if (jacobian.rows() != p || jacobian.cols() != p) throw UsageError("frame: Jacobian must be P x P");
  if (derivatives.size() != bundle.num_params()) throw UsageError("frame: parameter count mismatch");
  require_two_kept(bundle.kept);
  fisher_inverse(bundle.fisher, max_condition);  // throws when singular

  const RMatrix ft = jacobian * bundle.fisher.matrix() * jacobian.transpose();
  const RVector diag = ft.diagonal();
  const double top = diag.cwiseAbs().maxCoeff();
  RMatrix off = ft;
  off.diagonal().setZero();
  if (!(diag.minCoeff() > 0.0) || off.cwiseAbs().maxCoeff() > 1e-9 * top)
    throw UsageError("frame: J F J^T is not diagonal with positive entries");

  const ATensor a = a_tensor(bundle, derivatives, rho);
  std::vector<std::vector<HermitianOperator>> blocks;
  blocks.reserve(a.outcomes().size());
  const Eigen::Index dim = rho.dim();
  for (std::size_t pos = 0; pos < a.outcomes().size(); ++pos) {
    std::vector<HermitianOperator> block;
    block.reserve(static_cast<std::size_t>(p * p));
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index jj = 0; jj < p; ++jj) {
        HermitianOperator acc = HermitianOperator::zero(dim);
        for (Eigen::Index k = 0; k < p; ++k)
          for (Eigen::Index l = 0; l < p; ++l) {
            const double w = jacobian(i, k) * jacobian(jj, l);
            if (w != 0.0) acc += w * a.at(pos, static_cast<std::size_t>(k), static_cast<std::size_t>(l));
          }
        block.push_back(std::move(acc));
      }
    blocks.push_back(std::move(block));
  }

  RMatrix tscores = bundle.scores * jacobian.transpose();
  RMatrix lvec = tscores * diag.cwiseSqrt().cwiseInverse().asDiagonal();
  return DiagonalizedFrame{jacobian,
                           diag,
                           transform_derivatives(derivatives, jacobian),
                           std::move(tscores),
                           ATensor(a.num_outcomes(), a.num_params(), a.outcomes(), std::move(blocks)),
                           std::move(lvec),
                           bundle.kept};
}

DiagonalizedFrame diagonalize_frame(const FisherBundle& bundle, const std::vector<HermitianOperator>& derivatives,
                                    const HermitianOperator& rho, double max_condition) {
  fisher_inverse(bundle.fisher, max_condition);
  return frame_from_jacobian(bundle, derivatives, rho, canonical_jacobian(bundle.fisher), max_condition);
}

double x_convex_sum(const DiagonalizedFrame& frame, const HermitianOperator& rho, const Povm& noise) {
  check_noise_support(noise, frame.tilde_a.num_outcomes(), frame.kept, rho.dim());
  const std::size_t p = frame.num_params();
  double x = static_cast<double>(p);
  for (std::size_t a : frame.kept) {
    if (a >= noise.size()) break;
    const double c = rho.trace_product(noise[a]);
    double f = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double l = frame.l_vectors(static_cast<Eigen::Index>(a), jj);
      const double delta = 2.0 * frame.tilde_derivatives[j].trace_product(noise[a]) / std::sqrt(frame.tilde_fisher(jj));
      f += c * l * l - l * delta;
    }
    x += f;
  }
  return x;
}

LowerBound sigma_lower(const DiagonalizedFrame& frame) {
  require_two_kept(frame.kept);
  const std::size_t p = frame.num_params();
  const std::size_t k = frame.kept.size();
  const auto& ta = frame.tilde_a;
  const Eigen::Index dim = ta.at(0, 0, 0).dim();

  LowerBound out{-INFINITY, {0, 0}, 0.0, -INFINITY};
  for (std::size_t pa = 0; pa < k; ++pa)
    for (std::size_t pb = pa + 1; pb < k; ++pb) {
      const auto ra = static_cast<Eigen::Index>(frame.kept[pa]);
      const auto rb = static_cast<Eigen::Index>(frame.kept[pb]);
      const double half_norms = 0.5 * (frame.l_vectors.row(ra).squaredNorm() + frame.l_vectors.row(rb).squaredNorm());
      double printed = 0.0;
      CMatrix d = CMatrix::Zero(dim, dim);
      for (std::size_t j = 0; j < p; ++j) {
        const double fj = frame.tilde_fisher(static_cast<Eigen::Index>(j));
        const HermitianOperator diff = ta.at(pa, j, j) - ta.at(pb, j, j);
        printed += trace_norm(diff) / (2.0 * fj);
        d += diff.matrix() / fj;
      }
      const double value = static_cast<double>(p) + half_norms + printed;
      const double attained = static_cast<double>(p) + half_norms + 0.5 * trace_norm(HermitianOperator(d, 1e-9));
      out.two_outcome_best = std::max(out.two_outcome_best, attained);
      // ties (within rounding) keep the lowest-index pair
      if (value > out.value + 1e-12 * std::max(1.0, std::abs(value))) {
        out.value = value;
        out.best_pair = {frame.kept[pa], frame.kept[pb]};
        out.pair_attained = attained;
      }
    }
  return out;
}

UpperBound sigma_upper(const DiagonalizedFrame& frame) {
  require_two_kept(frame.kept);
  const std::size_t p = frame.num_params();
  UpperBound out{0.0, {}, {}};
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    std::size_t pn = 0, pm = 0;
    for (std::size_t pos = 1; pos < frame.kept.size(); ++pos) {
      const double s = frame.tilde_scores(static_cast<Eigen::Index>(frame.kept[pos]), jj);
      if (s > frame.tilde_scores(static_cast<Eigen::Index>(frame.kept[pn]), jj)) pn = pos;
      if (s < frame.tilde_scores(static_cast<Eigen::Index>(frame.kept[pm]), jj)) pm = pos;
    }
    const double ln = frame.tilde_scores(static_cast<Eigen::Index>(frame.kept[pn]), jj);
    const double lm = frame.tilde_scores(static_cast<Eigen::Index>(frame.kept[pm]), jj);
    const double an_am = trace_norm(frame.tilde_a.at(pn, j, j) - frame.tilde_a.at(pm, j, j));
    const double sigma = 1.0 + (ln * ln + lm * lm + an_am) / (2.0 * frame.tilde_fisher(jj));
    out.per_parameter.push_back(sigma);
    out.extremal.emplace_back(frame.kept[pn], frame.kept[pm]);
    out.value += sigma;
  }
  return out;
}

SusceptibilityReport susceptibility_report(const HermitianOperator& rho,
                                           const std::vector<HermitianOperator>& derivatives,
                                           const Povm& target, const SusceptibilityOptions& options) {
  const FisherBundle bundle = fisher_bundle(rho, derivatives, target, options.p_cutoff);
  require_two_kept(bundle.kept);
  DiagonalizedFrame frame = diagonalize_frame(bundle, derivatives, rho, options.max_condition);
  const LowerBound lo = sigma_lower(frame);
  UpperBound up = sigma_upper(frame);
  return SusceptibilityReport{lo.value,
                              up.value,
                              std::move(up.per_parameter),
                              lo.best_pair,
                              lo.pair_attained,
                              lo.two_outcome_best,
                              condition_number(bundle.fisher),
                              std::move(frame),
                              std::nullopt};
}

SusceptibilityReport susceptibility_report(const StatisticalModel& model, const ParamPoint& theta,
                                           const Povm& target, const SusceptibilityOptions& options) {
  return susceptibility_report(model.state_at(theta), model.derivatives_at(theta), target, options);
}

NoiseFunctional::NoiseFunctional(const ATensor& a, const RealSymmetricMatrix& f, double max_condition)
    : num_params_(a.num_params()), num_outcomes_(a.num_outcomes()), outcomes_(a.outcomes()) {
  if (static_cast<std::size_t>(f.dim()) != num_params_) throw UsageError("NoiseFunctional: F size mismatch");
  if (outcomes_.empty()) throw UsageError("NoiseFunctional: empty tensor");
  const RMatrix finv = fisher_inverse(f, max_condition);
  const Eigen::Index dim = a.at(0, 0, 0).dim();
  for (std::size_t pos = 0; pos < outcomes_.size(); ++pos) {
    CMatrix b = CMatrix::Zero(dim, dim);
    for (std::size_t j = 0; j < num_params_; ++j)
      for (std::size_t k = 0; k < num_params_; ++k)
        b += finv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * a.at(pos, j, k).matrix();
    weight_traces_.push_back(b.trace().real());
    weights_.push_back(std::move(b));
  }
}

double NoiseFunctional::evaluate(const Povm& noise) const {
  check_noise_support(noise, num_outcomes_, outcomes_, dim());
  double x = static_cast<double>(num_params_);
  for (std::size_t pos = 0; pos < outcomes_.size(); ++pos) {
    if (outcomes_[pos] >= noise.size()) break;
    x += trace_of_product(weights_[pos], noise[outcomes_[pos]].matrix());
  }
  return x;
}

double NoiseFunctional::evaluate_pair(std::size_t pa, std::size_t pb, const CMatrix& effect) const {
  return static_cast<double>(num_params_) + weight_traces_[pb] +
         trace_of_product(weights_[pa] - weights_[pb], effect);
}

std::pair<double, CMatrix> NoiseFunctional::best_pair_effect(std::size_t pa, std::size_t pb) const {
  const HermitianEigen eig = eig_hermitian(HermitianOperator(weights_[pa] - weights_[pb], 1e-9));
  const Eigen::Index n = eig.values.size();
  CMatrix proj = CMatrix::Zero(n, n);
  double gain = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (eig.values(i) > 0.0) {
      gain += eig.values(i);
      proj += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
  return {static_cast<double>(num_params_) + weight_traces_[pb] + gain, proj};
}

}  // namespace menos
