#pragma once

#include "menos/linalg.hpp"
#include "menos/model.hpp"

#include <cstddef>
#include <vector>

namespace menos {

inline constexpr double kDefaultPCutoff = 1e-12;
inline constexpr double kDefaultSldCutoff = 1e-10;
inline constexpr double kMaxConditionNumber = 1e12;

/// Outcome statistics of one (state, POVM) pair and the classical Fisher matrix.
///
/// Outcomes with p < p_cutoff are dropped when every Tr[d_j rho M_a] is below
/// sqrt(p_cutoff); their score rows are zero and they are absent from `kept`.
struct FisherBundle {
  std::vector<double> probabilities;  // all outcomes
  RMatrix derivative_traces;          // Tr[d_j rho M_a], outcomes x P
  RMatrix scores;                     // l_{a,j}; zero rows for dropped outcomes
  std::vector<std::size_t> kept;
  RealSymmetricMatrix fisher;

  std::size_t num_outcomes() const { return probabilities.size(); }
  std::size_t num_params() const { return static_cast<std::size_t>(fisher.dim()); }
  bool is_kept(std::size_t outcome) const;
};

FisherBundle fisher_bundle(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                           const Povm& povm, double p_cutoff = kDefaultPCutoff);
FisherBundle fisher_bundle(const StatisticalModel& model, const ParamPoint& theta, const Povm& povm,
                           double p_cutoff = kDefaultPCutoff);

struct QfiBundle {
  std::vector<HermitianOperator> slds;
  RealSymmetricMatrix qfi;
  double eigen_cutoff;
};

// Solves 2 d_rho = L rho + rho L in the eigenbasis of rho; entries with
// lambda_i + lambda_j <= cutoff (the kernel block) are set to zero.
HermitianOperator sld(const HermitianOperator& rho, const HermitianOperator& drho,
                      double cutoff = kDefaultSldCutoff);

QfiBundle qfi_matrix(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                     double cutoff = kDefaultSldCutoff);
QfiBundle qfi_matrix(const StatisticalModel& model, const ParamPoint& theta,
                     double cutoff = kDefaultSldCutoff);

// |Tr[rho [L_j, L_k]]|; the trace is purely imaginary for Hermitian arguments.
double weak_commutativity(const HermitianOperator& rho, const HermitianOperator& lj,
                          const HermitianOperator& lk);

// Inverse of a Fisher-type matrix; SingularFisherError when not positive
// definite or when the condition number exceeds max_condition.
RMatrix fisher_inverse(const RealSymmetricMatrix& f, double max_condition = kMaxConditionNumber);

// m tr[F^-1] / tr[Q^-1]
double r_metric(const RealSymmetricMatrix& f, const RealSymmetricMatrix& q, int copies = 1);

// m (F^-1)_jj / (Q^-1)_jj: parameter j estimated with the others as nuisance.
double r_nuisance(const RealSymmetricMatrix& f, const RealSymmetricMatrix& q, std::size_t j, int copies = 1);

}  // namespace menos
