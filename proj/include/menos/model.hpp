#pragma once

#include "menos/linalg.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace menos {

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kPovmTol = 1e-9;

/// A point theta in parameter space, with labels.
class ParamPoint {
 public:
  ParamPoint(std::vector<double> values, std::vector<std::string> names);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(const std::string& name) const;
  std::span<const double> values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  ParamPoint with(std::size_t i, double value) const;

 private:
  std::vector<double> values_;
  std::vector<std::string> names_;
};

enum class DerivativeMode { Analytic, FiniteDifference };

/// theta -> (rho_theta, d_j rho_theta).
///
/// The domain check runs before every evaluation and throws DomainError; models
/// never extrapolate. Without an analytic derivative function, derivatives come
/// from a second-order central stencil of step fd_step.
class StatisticalModel {
 public:
  using StateFn = std::function<HermitianOperator(std::span<const double>)>;
  using DerivativeFn = std::function<std::vector<HermitianOperator>(std::span<const double>)>;
  using DomainCheck = std::function<void(std::span<const double>)>;

  StatisticalModel(std::string name, Eigen::Index dim, std::vector<std::string> param_names,
                   StateFn state, DomainCheck domain, DerivativeFn derivatives = {},
                   double fd_step = kDefaultFdStep);

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t num_params() const { return param_names_.size(); }
  const std::vector<std::string>& param_names() const { return param_names_; }
  DerivativeMode derivative_mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  ParamPoint point(std::vector<double> values) const;
  void check_domain(const ParamPoint& theta) const;

  HermitianOperator state_at(const ParamPoint& theta) const;
  std::vector<HermitianOperator> derivatives_at(const ParamPoint& theta) const;

  // Same model, derivatives forced through the central stencil.
  StatisticalModel with_finite_differences(double step = kDefaultFdStep) const;

 private:
  void check_arity(const ParamPoint& theta) const;
  std::vector<HermitianOperator> finite_difference(const ParamPoint& theta) const;

  std::string name_;
  Eigen::Index dim_;
  std::vector<std::string> param_names_;
  StateFn state_;
  DomainCheck domain_;
  DerivativeFn derivatives_;
  DerivativeMode mode_;
  double fd_step_;
};

HermitianOperator state_at(const StatisticalModel& model, const ParamPoint& theta);
std::vector<HermitianOperator> derivatives_at(const StatisticalModel& model, const ParamPoint& theta);

// m-fold tensor power; derivatives by the product rule.
StatisticalModel tensor_model(const StatisticalModel& model, int copies);

// Sub-model over the parameters in `keep`; the others stay frozen at `base`.
StatisticalModel restrict_model(const StatisticalModel& model, const std::vector<std::size_t>& keep,
                                const ParamPoint& base);

// Linear chart change theta = origin + K^T psi, so d/dpsi_i = sum_k K_ik d/dtheta_k.
StatisticalModel reparametrize(const StatisticalModel& model, const RMatrix& k, const ParamPoint& origin);

// d~_i = sum_k J_ik d_k
std::vector<HermitianOperator> transform_derivatives(const std::vector<HermitianOperator>& derivatives,
                                                     const RMatrix& jacobian);

/// Ordered list of measurement operators with labels. Construction only checks
/// shapes; validity (PSD, completeness) is reported by validate_povm or enforced
/// by Povm::checked.
class Povm {
 public:
  explicit Povm(std::vector<HermitianOperator> elements, std::vector<std::string> labels = {});
  static Povm checked(std::vector<HermitianOperator> elements, std::vector<std::string> labels = {},
                      double tol = kPovmTol);

  std::size_t size() const { return elements_.size(); }
  Eigen::Index dim() const { return elements_.front().dim(); }
  const HermitianOperator& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<HermitianOperator>& elements() const { return elements_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Appends zero elements up to `count` outcomes.
  Povm padded(std::size_t count) const;
  // Same permutation applied to elements and labels: new[i] = old[perm[i]].
  Povm permuted(const std::vector<std::size_t>& perm) const;

 private:
  std::vector<HermitianOperator> elements_;
  std::vector<std::string> labels_;
};

struct PovmValidation {
  double min_eigenvalue;          // over all elements
  std::size_t worst_element;      // element attaining it
  double completeness_residual;   // max-norm of sum_a M_a - I
  bool passed;
};

PovmValidation validate_povm(const Povm& povm, double tol);

// (1 - eps) M + eps N; the shorter POVM is padded with zero elements.
Povm mix_povm(const Povm& m, const Povm& n, double eps);

}  // namespace menos
