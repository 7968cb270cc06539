#pragma once

#include "menos/fisher.hpp"
#include "menos/linalg.hpp"
#include "menos/model.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace menos {

struct SusceptibilityOptions {
  double p_cutoff = kDefaultPCutoff;
  double max_condition = kMaxConditionNumber;
};

/// A_{a;jk} = l_{a,j} l_{a,k} rho - l_{a,j} d_k rho - l_{a,k} d_j rho, one P x P
/// block per kept outcome of the target POVM.
class ATensor {
 public:
  ATensor(std::size_t num_outcomes, std::size_t num_params, std::vector<std::size_t> outcomes,
          std::vector<std::vector<HermitianOperator>> blocks);

  std::size_t num_outcomes() const { return num_outcomes_; }
  std::size_t num_params() const { return num_params_; }
  // Target-POVM outcome index of each stored block, ascending.
  const std::vector<std::size_t>& outcomes() const { return outcomes_; }
  // Position in outcomes() of a target outcome, if it was kept.
  std::optional<std::size_t> position(std::size_t outcome) const;

  const HermitianOperator& at(std::size_t pos, std::size_t j, std::size_t k) const {
    return blocks_[pos][j * num_params_ + k];
  }

 private:
  std::size_t num_outcomes_;
  std::size_t num_params_;
  std::vector<std::size_t> outcomes_;
  std::vector<std::vector<HermitianOperator>> blocks_;
};

ATensor a_tensor(const FisherBundle& bundle, const std::vector<HermitianOperator>& derivatives,
                 const HermitianOperator& rho);

// G[N]_{jk} = sum_a Tr[A_{a;jk} N_a]. A shorter noise POVM is implicitly padded
// with zeros; weight on outcomes the tensor does not cover raises OutcomeMismatchError.
RealSymmetricMatrix g_matrix(const ATensor& a, const Povm& noise);

// I + F^-1 G
RMatrix xi_matrix(const RealSymmetricMatrix& f, const RealSymmetricMatrix& g,
                  double max_condition = kMaxConditionNumber);

// P + tr[F^-1 G]
double x_scalar(const RealSymmetricMatrix& f, const RealSymmetricMatrix& g, std::size_t num_params,
                double max_condition = kMaxConditionNumber);

// (det F[M] - det F[(1-eps)M + eps N]) / (eps det F[M])
double x_finite_epsilon(const HermitianOperator& rho, const std::vector<HermitianOperator>& derivatives,
                        const Povm& target, const Povm& noise, double eps,
                        double p_cutoff = kDefaultPCutoff);

// Scalar FI MeNoS of a one-parameter model:
// 1 + (l_n^2 + l_m^2 + ||A_n - A_m||_1) / (2F) with n, m the outcomes of largest and smallest score.
double sigma_single(const HermitianOperator& rho, const HermitianOperator& derivative, const Povm& target,
                    double p_cutoff = kDefaultPCutoff);
double sigma_single(const StatisticalModel& model, const ParamPoint& theta, const Povm& target,
                    double p_cutoff = kDefaultPCutoff);

/// Reparametrization in which the Fisher matrix is diagonal, and everything the
/// bounds need expressed in it.
struct DiagonalizedFrame {
  RMatrix jacobian;                                // J_{ij} = d theta_j / d phi_i
  RVector tilde_fisher;                            // diagonal of J F J^T
  std::vector<HermitianOperator> tilde_derivatives;
  RMatrix tilde_scores;                            // outcomes x P, zero rows for dropped outcomes
  ATensor tilde_a;
  RMatrix l_vectors;                               // tilde_scores / sqrt(tilde_fisher), row per outcome
  std::vector<std::size_t> kept;

  std::size_t num_params() const { return static_cast<std::size_t>(tilde_fisher.size()); }
};

// Orthogonal J from the eigenvectors of F. Inside a degenerate eigenspace the
// basis is the Gram-Schmidt image of the original parameter axes, so a diagonal
// F gives J = I; rows are signed and ordered by their dominant original axis.
RMatrix canonical_jacobian(const RealSymmetricMatrix& f);

DiagonalizedFrame diagonalize_frame(const FisherBundle& bundle, const std::vector<HermitianOperator>& derivatives,
                                    const HermitianOperator& rho,
                                    double max_condition = kMaxConditionNumber);

// Any invertible J with J F J^T diagonal (relative 1e-9); UsageError otherwise.
DiagonalizedFrame frame_from_jacobian(const FisherBundle& bundle,
                                      const std::vector<HermitianOperator>& derivatives,
                                      const HermitianOperator& rho, const RMatrix& jacobian,
                                      double max_condition = kMaxConditionNumber);

// P + sum_a f_a(L_a), f_a(x) = c_a |x|^2 - x . delta_a, evaluated in the frame.
double x_convex_sum(const DiagonalizedFrame& frame, const HermitianOperator& rho, const Povm& noise);

struct LowerBound {
  double value;
  std::pair<std::size_t, std::size_t> best_pair;  // target outcome indices
  // X actually reached by the best two-outcome noise supported on best_pair.
  double pair_attained;
  // Largest X over all two-outcome noises on any kept pair.
  double two_outcome_best;
};

struct UpperBound {
  double value;
  std::vector<double> per_parameter;
  std::vector<std::pair<std::size_t, std::size_t>> extremal;  // (n_j, m_j): argmax / argmin of tilde score j
};

LowerBound sigma_lower(const DiagonalizedFrame& frame);
UpperBound sigma_upper(const DiagonalizedFrame& frame);

struct SusceptibilityReport {
  double sigma_lower;
  double sigma_upper;
  std::vector<double> per_parameter_sigmas;
  std::pair<std::size_t, std::size_t> best_pair;
  double pair_attained;
  double two_outcome_best;
  double fisher_condition;
  DiagonalizedFrame frame;
  std::optional<double> oracle_best;
};

SusceptibilityReport susceptibility_report(const HermitianOperator& rho,
                                           const std::vector<HermitianOperator>& derivatives,
                                           const Povm& target, const SusceptibilityOptions& options = {});
SusceptibilityReport susceptibility_report(const StatisticalModel& model, const ParamPoint& theta,
                                           const Povm& target, const SusceptibilityOptions& options = {});

/// X[M, N] as a linear functional of the noise: X = P + sum_a Tr[B_a N_a],
/// B_a = sum_{jk} (F^-1)_{jk} A_{a;jk}. Frame independent.
class NoiseFunctional {
 public:
  NoiseFunctional(const ATensor& a, const RealSymmetricMatrix& f, double max_condition = kMaxConditionNumber);

  std::size_t num_params() const { return num_params_; }
  std::size_t num_outcomes() const { return num_outcomes_; }
  Eigen::Index dim() const { return weights_.front().rows(); }
  const std::vector<std::size_t>& outcomes() const { return outcomes_; }
  const CMatrix& weight(std::size_t pos) const { return weights_[pos]; }

  double evaluate(const Povm& noise) const;
  // Two-outcome noise N_a = e, N_b = I - e on kept positions (pa, pb).
  double evaluate_pair(std::size_t pa, std::size_t pb, const CMatrix& effect) const;
  // Best two-outcome noise on (pa, pb): projector onto the positive part of B_a - B_b.
  std::pair<double, CMatrix> best_pair_effect(std::size_t pa, std::size_t pb) const;

 private:
  std::size_t num_params_;
  std::size_t num_outcomes_;
  std::vector<std::size_t> outcomes_;
  std::vector<CMatrix> weights_;
  std::vector<double> weight_traces_;
};

}  // namespace menos
