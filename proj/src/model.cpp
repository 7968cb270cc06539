#include "menos/model.hpp"

#include "menos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace menos {

ParamPoint::ParamPoint(std::vector<double> values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.empty()) throw UsageError("ParamPoint: at least one parameter required");
  if (values_.size() != names_.size()) throw UsageError("ParamPoint: values and names differ in length");
}

double ParamPoint::at(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw UsageError("ParamPoint: no parameter named '" + name + "'");
  return values_[static_cast<std::size_t>(it - names_.begin())];
}

ParamPoint ParamPoint::with(std::size_t i, double value) const {
  ParamPoint out = *this;
  out.values_.at(i) = value;
  return out;
}

StatisticalModel::StatisticalModel(std::string name, Eigen::Index dim,
                                   std::vector<std::string> param_names, StateFn state,
                                   DomainCheck domain, DerivativeFn derivatives, double fd_step)
    : name_(std::move(name)),
      dim_(dim),
      param_names_(std::move(param_names)),
      state_(std::move(state)),
      domain_(std::move(domain)),
      derivatives_(std::move(derivatives)),
      mode_(derivatives_ ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference),
      fd_step_(fd_step) {
  if (dim_ < 1) throw UsageError("StatisticalModel: dimension must be >= 1");
  if (param_names_.empty()) throw UsageError("StatisticalModel: at least one parameter required");
  if (!state_) throw UsageError("StatisticalModel: missing state function");
  if (!(fd_step_ > 0.0)) throw UsageError("StatisticalModel: finite-difference step must be positive");
}

ParamPoint StatisticalModel::point(std::vector<double> values) const {
  return ParamPoint(std::move(values), param_names_);
}

void StatisticalModel::check_arity(const ParamPoint& theta) const {
  if (theta.size() != num_params()) {
    std::ostringstream os;
    os << name_ << ": expected " << num_params() << " parameters, got " << theta.size();
    throw UsageError(os.str());
  }
}

void StatisticalModel::check_domain(const ParamPoint& theta) const {
  check_arity(theta);
  for (double v : theta.values())
    if (!std::isfinite(v)) throw DomainError(name_ + ": non-finite parameter value");
  if (domain_) domain_(theta.values());
}

HermitianOperator StatisticalModel::state_at(const ParamPoint& theta) const {
  check_domain(theta);
  HermitianOperator rho = state_(theta.values());
  if (rho.dim() != dim_) throw UsageError(name_ + ": state function returned wrong dimension");
  return rho;
}

std::vector<HermitianOperator> StatisticalModel::derivatives_at(const ParamPoint& theta) const {
  check_domain(theta);
  if (mode_ == DerivativeMode::FiniteDifference) return finite_difference(theta);
  auto out = derivatives_(theta.values());
  if (out.size() != num_params()) throw UsageError(name_ + ": derivative function returned wrong count");
  return out;
}

std::vector<HermitianOperator> StatisticalModel::finite_difference(const ParamPoint& theta) const {
  std::vector<HermitianOperator> out;
  out.reserve(num_params());
  for (std::size_t j = 0; j < num_params(); ++j) {
    const ParamPoint plus = theta.with(j, theta[j] + fd_step_);
    const ParamPoint minus = theta.with(j, theta[j] - fd_step_);
    try {
      check_domain(plus);
      check_domain(minus);
    } catch (const DomainError& e) {
      throw DomainError(name_ + ": central stencil for '" + param_names_[j] +
                        "' leaves the domain (" + e.what() + ")");
    }
    HermitianOperator d = state_(plus.values()) - state_(minus.values());
    d *= 1.0 / (2.0 * fd_step_);
    out.push_back(std::move(d));
  }
  return out;
}

StatisticalModel StatisticalModel::with_finite_differences(double step) const {
  return StatisticalModel(name_, dim_, param_names_, state_, domain_, {}, step);
}

HermitianOperator state_at(const StatisticalModel& model, const ParamPoint& theta) {
  return model.state_at(theta);
}

std::vector<HermitianOperator> derivatives_at(const StatisticalModel& model, const ParamPoint& theta) {
  return model.derivatives_at(theta);
}

namespace {

HermitianOperator tensor_power(const HermitianOperator& rho, int copies) {
  HermitianOperator out = rho;
  for (int c = 1; c < copies; ++c) out = tensor(out, rho);
  return out;
}

}  // namespace

StatisticalModel tensor_model(const StatisticalModel& model, int copies) {
  if (copies < 1) throw UsageError("tensor_model: copies must be >= 1");
  if (copies == 1) return model;

  Eigen::Index dim = 1;
  for (int c = 0; c < copies; ++c) dim *= model.dim();

  auto base = model;
  auto state = [base, copies](std::span<const double> th) {
    const ParamPoint theta = base.point({th.begin(), th.end()});
    return tensor_power(base.state_at(theta), copies);
  };
  // d(rho^{(x)m}) = sum_pos rho (x) ... (x) d rho (x) ... (x) rho
  auto derivatives = [base, copies](std::span<const double> th) {
    const ParamPoint theta = base.point({th.begin(), th.end()});
    const HermitianOperator rho = base.state_at(theta);
    const auto drho = base.derivatives_at(theta);
    std::vector<HermitianOperator> out;
    out.reserve(drho.size());
    for (const auto& d : drho) {
      HermitianOperator sum = HermitianOperator::zero(1);
      bool first = true;
      for (int pos = 0; pos < copies; ++pos) {
        HermitianOperator term = pos == 0 ? d : rho;
        for (int c = 1; c < copies; ++c) term = tensor(term, c == pos ? d : rho);
        if (first) {
          sum = std::move(term);
          first = false;
        } else {
          sum += term;
        }
      }
      out.push_back(std::move(sum));
    }
    return out;
  };
  auto domain = [base](std::span<const double> th) { base.check_domain(base.point({th.begin(), th.end()})); };

  std::ostringstream name;
  name << model.name() << "^(x)" << copies;
  return StatisticalModel(name.str(), dim, model.param_names(), state, domain,
                          model.derivative_mode() == DerivativeMode::Analytic
                              ? StatisticalModel::DerivativeFn(derivatives)
                              : StatisticalModel::DerivativeFn{},
                          model.fd_step());
}

StatisticalModel restrict_model(const StatisticalModel& model, const std::vector<std::size_t>& keep,
                                const ParamPoint& base_point) {
  if (keep.empty()) throw UsageError("restrict_model: keep at least one parameter");
  model.check_domain(base_point);
  std::vector<std::string> names;
  for (std::size_t k : keep) {
    if (k >= model.num_params()) throw UsageError("restrict_model: parameter index out of range");
    names.push_back(model.param_names()[k]);
  }
  auto full = [base_point, keep](std::span<const double> th) {
    std::vector<double> v(base_point.values().begin(), base_point.values().end());
    for (std::size_t i = 0; i < keep.size(); ++i) v[keep[i]] = th[i];
    return ParamPoint(std::move(v), base_point.names());
  };
  auto state = [model, full](std::span<const double> th) { return model.state_at(full(th)); };
  auto derivatives = [model, full, keep](std::span<const double> th) {
    auto all = model.derivatives_at(full(th));
    std::vector<HermitianOperator> out;
    for (std::size_t k : keep) out.push_back(all[k]);
    return out;
  };
  auto domain = [model, full](std::span<const double> th) { model.check_domain(full(th)); };
  return StatisticalModel(model.name() + "|restricted", model.dim(), names, state, domain,
                          model.derivative_mode() == DerivativeMode::Analytic
                              ? StatisticalModel::DerivativeFn(derivatives)
                              : StatisticalModel::DerivativeFn{},
                          model.fd_step());
}

std::vector<HermitianOperator> transform_derivatives(const std::vector<HermitianOperator>& derivatives,
                                                     const RMatrix& jacobian) {
  const auto p = static_cast<Eigen::Index>(derivatives.size());
  if (jacobian.rows() != p || jacobian.cols() != p)
    throw UsageError("transform_derivatives: Jacobian must be P x P");
  std::vector<HermitianOperator> out;
  out.reserve(derivatives.size());
  for (Eigen::Index i = 0; i < p; ++i) {
    HermitianOperator d = HermitianOperator::zero(derivatives.front().dim());
    for (Eigen::Index k = 0; k < p; ++k)
      if (jacobian(i, k) != 0.0) d += jacobian(i, k) * derivatives[static_cast<std::size_t>(k)];
    out.push_back(std::move(d));
  }
  return out;
}

StatisticalModel reparametrize(const StatisticalModel& model, const RMatrix& k, const ParamPoint& origin) {
  const auto p = static_cast<Eigen::Index>(model.num_params());
  if (k.rows() != p || k.cols() != p) throw UsageError("reparametrize: K must be P x P");
  if (std::abs(k.determinant()) < 1e-14) throw UsageError("reparametrize: K is singular");
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < p; ++i) names.push_back("psi" + std::to_string(i + 1));

  auto to_theta = [model, k, origin](std::span<const double> psi) {
    const Eigen::Map<const RVector> v(psi.data(), static_cast<Eigen::Index>(psi.size()));
    const RVector shift = k.transpose() * v;
    std::vector<double> th(origin.values().begin(), origin.values().end());
    for (std::size_t i = 0; i < th.size(); ++i) th[i] += shift(static_cast<Eigen::Index>(i));
    return model.point(std::move(th));
  };
  auto state = [model, to_theta](std::span<const double> psi) { return model.state_at(to_theta(psi)); };
  auto derivatives = [model, to_theta, k](std::span<const double> psi) {
    return transform_derivatives(model.derivatives_at(to_theta(psi)), k);
  };
  auto domain = [model, to_theta](std::span<const double> psi) { model.check_domain(to_theta(psi)); };
  return StatisticalModel(model.name() + "|reparametrized", model.dim(), names, state, domain, derivatives,
                          model.fd_step());
}

Povm::Povm(std::vector<HermitianOperator> elements, std::vector<std::string> labels)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
  if (elements_.empty()) throw UsageError("Povm: at least one element required");
  const Eigen::Index d = elements_.front().dim();
  for (const auto& e : elements_)
    if (e.dim() != d) throw UsageError("Povm: elements have different dimensions");
  if (labels_.empty()) {
    for (std::size_t i = 0; i < elements_.size(); ++i) labels_.push_back(std::to_string(i));
  } else if (labels_.size() != elements_.size()) {
    throw UsageError("Povm: label count differs from element count");
  }
}

Povm Povm::checked(std::vector<HermitianOperator> elements, std::vector<std::string> labels, double tol) {
  Povm p(std::move(elements), std::move(labels));
  const auto v = validate_povm(p, tol);
  if (!v.passed) {
    std::ostringstream os;
    os << "invalid POVM: min eigenvalue " << v.min_eigenvalue << ", completeness residual "
       << v.completeness_residual;
    throw ConstructionError(os.str());
  }
  return p;
}

Povm Povm::padded(std::size_t count) const {
  if (count <= size()) return *this;
  auto elements = elements_;
  auto labels = labels_;
  for (std::size_t i = size(); i < count; ++i) {
    elements.push_back(HermitianOperator::zero(dim()));
    labels.push_back("zero" + std::to_string(i));
  }
  return Povm(std::move(elements), std::move(labels));
}

Povm Povm::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != size()) throw UsageError("Povm::permuted: permutation size mismatch");
  std::vector<HermitianOperator> elements;
  std::vector<std::string> labels;
  std::vector<bool> seen(size(), false);
  for (std::size_t i : perm) {
    if (i >= size() || seen[i]) throw UsageError("Povm::permuted: not a permutation");
    seen[i] = true;
    elements.push_back(elements_[i]);
    labels.push_back(labels_[i]);
  }
  return Povm(std::move(elements), std::move(labels));
}

PovmValidation validate_povm(const Povm& povm, double tol) {
  PovmValidation out{0.0, 0, 0.0, false};
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  CMatrix sum = CMatrix::Zero(povm.dim(), povm.dim());
  for (std::size_t a = 0; a < povm.size(); ++a) {
    const double lo = min_eigenvalue(povm[a]);
    if (lo < out.min_eigenvalue) {
      out.min_eigenvalue = lo;
      out.worst_element = a;
    }
    sum += povm[a].matrix();
  }
  sum -= CMatrix::Identity(povm.dim(), povm.dim());
  out.completeness_residual = sum.cwiseAbs().maxCoeff();
  out.passed = out.min_eigenvalue >= -tol && out.completeness_residual <= tol;
  return out;
}

Povm mix_povm(const Povm& m, const Povm& n, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw UsageError("mix_povm: eps must lie in [0, 1]");
  if (m.dim() != n.dim()) throw UsageError("mix_povm: POVMs act on different dimensions");
  const std::size_t count = std::max(m.size(), n.size());
  const Povm mp = m.padded(count);
  const Povm np = n.padded(count);
  std::vector<HermitianOperator> elements;
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < count; ++a) {
    elements.push_back((1.0 - eps) * mp[a] + eps * np[a]);
    labels.push_back(mp.labels()[a] + "|" + np.labels()[a]);
  }
  return Povm(std::move(elements), std::move(labels));
}

}  // namespace menos
