#include "menos/fisher.hpp"

#include "menos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace menos {

bool FisherBundle::is_kept(std::size_t outcome) const {
  return std::find(kept.begin(), kept.end(), outcome) != kept.end();
}

FisherBundle fisher_bundle(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                           const Povm& povm, double p_cutoff) {
  if (derivatives.empty()) throw UsageError("fisher_bundle: no parameters");
  if (povm.dim() != rho.dim()) throw UsageError("fisher_bundle: POVM and state dimensions differ");
  const std::size_t outcomes = povm.size();
  const auto p = static_cast<Eigen::Index>(derivatives.size());

  std::vector<double> probs(outcomes);
  RMatrix traces(static_cast<Eigen::Index>(outcomes), p);
  RMatrix scores = RMatrix::Zero(static_cast<Eigen::Index>(outcomes), p);
  std::vector<std::size_t> kept;
  RMatrix f = RMatrix::Zero(p, p);
  const double score_cutoff = std::sqrt(p_cutoff);

  for (std::size_t a = 0; a < outcomes; ++a) {
    const auto row = static_cast<Eigen::Index>(a);
    probs[a] = rho.trace_product(povm[a]);
    for (Eigen::Index j = 0; j < p; ++j)
      traces(row, j) = derivatives[static_cast<std::size_t>(j)].trace_product(povm[a]);

    if (probs[a] < p_cutoff) {
      const double worst = traces.row(row).cwiseAbs().maxCoeff();
      if (worst > score_cutoff) {
        std::ostringstream os;
        os << "fisher_bundle: outcome " << a << " has p = " << probs[a]
           << " but |Tr[d rho M]| = " << worst << "; its Fisher contribution diverges";
        throw SingularScoreError(os.str());
      }
      continue;
    }
    kept.push_back(a);
    scores.row(row) = traces.row(row) / probs[a];
    f += probs[a] * scores.row(row).transpose() * scores.row(row);
  }
  return FisherBundle{std::move(probs), std::move(traces), std::move(scores), std::move(kept),
                      RealSymmetricMatrix(f)};
}

FisherBundle fisher_bundle(const StatisticalModel& model, const ParamPoint& theta, const Povm& povm,
                           double p_cutoff) {
  return fisher_bundle(model.state_at(theta), model.derivatives_at(theta), povm, p_cutoff);
}

namespace {

CMatrix sld_in_eigenbasis(const HermitianEigen& eig, const HermitianOperator& drho, double cutoff) {
  const CMatrix d = eig.vectors.adjoint() * drho.matrix() * eig.vectors;
  const Eigen::Index n = d.rows();
  CMatrix l = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = eig.values(i) + eig.values(j);
      if (s > cutoff) l(i, j) = 2.0 * d(i, j) / s;
    }
  return eig.vectors * l * eig.vectors.adjoint();
}

}  // namespace

HermitianOperator sld(const HermitianOperator& rho, const HermitianOperator& drho, double cutoff) {
  if (drho.dim() != rho.dim()) throw UsageError("sld: dimension mismatch");
  return HermitianOperator(sld_in_eigenbasis(eig_hermitian(rho), drho, cutoff), 1e-10);
}

QfiBundle qfi_matrix(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                     double cutoff) {
  if (derivatives.empty()) throw UsageError("qfi_matrix: no parameters");
  const HermitianEigen eig = eig_hermitian(rho);
  std::vector<HermitianOperator> slds;
  slds.reserve(derivatives.size());
  for (const auto& d : derivatives) {
    if (d.dim() != rho.dim()) throw UsageError("qfi_matrix: dimension mismatch");
    slds.emplace_back(sld_in_eigenbasis(eig, d, cutoff), 1e-10);
  }
  const auto p = static_cast<Eigen::Index>(slds.size());
  RMatrix q(p, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j; k < p; ++k) {
      const CMatrix& lj = slds[static_cast<std::size_t>(j)].matrix();
      const CMatrix& lk = slds[static_cast<std::size_t>(k)].matrix();
      // Re Tr[rho L_j L_k] = Tr[rho (L_j L_k + L_k L_j)/2]
      q(j, k) = q(k, j) = (rho.matrix() * lj * lk).trace().real();
    }
  return QfiBundle{std::move(slds), RealSymmetricMatrix(q), cutoff};
}

QfiBundle qfi_matrix(const StatisticalModel& model, const ParamPoint& theta, double cutoff) {
  return qfi_matrix(model.state_at(theta), model.derivatives_at(theta), cutoff);
}

double weak_commutativity(const HermitianOperator& rho, const HermitianOperator& lj,
                          const HermitianOperator& lk) {
  const CMatrix comm = lj.matrix() * lk.matrix() - lk.matrix() * lj.matrix();
  return std::abs((rho.matrix() * comm).trace().imag());
}

RMatrix fisher_inverse(const RealSymmetricMatrix& f, double max_condition) {
  const double cond = condition_number(f);
  if (!(cond <= max_condition)) {
    std::ostringstream os;
    os << "Fisher matrix is singular or ill-conditioned (condition number " << cond << ")";
    throw SingularFisherError(os.str(), cond);
  }
  const SymmetricEigen eig = eig_symmetric(f);
  RMatrix inv = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  return (inv + inv.transpose()) / 2.0;
}

double r_metric(const RealSymmetricMatrix& f, const RealSymmetricMatrix& q, int copies) {
  if (f.dim() != q.dim()) throw UsageError("r_metric: F and Q differ in size");
  if (copies < 1) throw UsageError("r_metric: copies must be >= 1");
  return copies * fisher_inverse(f).trace() / fisher_inverse(q).trace();
}

double r_nuisance(const RealSymmetricMatrix& f, const RealSymmetricMatrix& q, std::size_t j, int copies) {
  if (f.dim() != q.dim()) throw UsageError("r_nuisance: F and Q differ in size");
  const auto jj = static_cast<Eigen::Index>(j);
  if (jj >= f.dim()) throw UsageError("r_nuisance: parameter index out of range");
  if (copies < 1) throw UsageError("r_nuisance: copies must be >= 1");
  return copies * fisher_inverse(f)(jj, jj) / fisher_inverse(q)(jj, jj);
}

}  // namespace menos
