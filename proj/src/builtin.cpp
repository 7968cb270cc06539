#include "menos/builtin.hpp"

#include "menos/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/hermite.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace menos {

namespace {

using std::numbers::pi;

HermitianOperator qubit_state(double phi, double delta) {
  const cplx off = std::exp(cplx(-delta, -phi));
  CMatrix m(2, 2);
  m << 1.0, off, std::conj(off), 1.0;
  return HermitianOperator(0.5 * m);
}

void qubit_domain(std::span<const double> t) {
  if (!std::isfinite(t[0]) || !std::isfinite(t[1])) throw DomainError("phase-dephasing: non-finite parameter");
  if (!(t[1] > 0.0)) {
    std::ostringstream os;
    os << "phase-dephasing: Delta must be > 0 (got " << t[1] << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

StatisticalModel qubit_phase_dephasing() {
  auto state = [](std::span<const double> t) { return qubit_state(t[0], t[1]); };
  auto derivs = [](std::span<const double> t) {
    const cplx off = std::exp(cplx(-t[1], -t[0]));
    CMatrix dphi(2, 2), ddelta(2, 2);
    dphi << 0.0, cplx(0, -1) * off, std::conj(cplx(0, -1) * off), 0.0;
    ddelta << 0.0, -off, -std::conj(off), 0.0;
    return std::vector<HermitianOperator>{HermitianOperator(0.5 * dphi), HermitianOperator(0.5 * ddelta)};
  };
  return StatisticalModel("phase-dephasing", 2, {"phi", "Delta"}, state, qubit_domain, derivs);
}

Povm separable_povm() {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0, 1);
  std::vector<CVector> kets(4, CVector(2));
  kets[0] << s, s;
  kets[1] << s, -s;
  kets[2] << s, i * s;
  kets[3] << s, -i * s;
  std::vector<HermitianOperator> els;
  for (const auto& k : kets) els.push_back(0.5 * HermitianOperator::projector(k));
  return Povm::checked(std::move(els), {"+x", "-x", "+y", "-y"});
}

Povm bell_povm() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<CVector> kets(4, CVector::Zero(4));
  kets[0](1) = s, kets[0](2) = s;   // Psi+
  kets[1](1) = s, kets[1](2) = -s;  // Psi-
  kets[2](0) = s, kets[2](3) = s;   // Phi+
  kets[3](0) = s, kets[3](3) = -s;  // Phi-
  std::vector<HermitianOperator> els;
  for (const auto& k : kets) els.push_back(HermitianOperator::projector(k));
  return Povm::checked(std::move(els), {"Psi+", "Psi-", "Phi+", "Phi-"});
}

namespace {

double hg_mode(int n, double u) {
  return std::pow(2.0 * pi, -0.25) * boost::math::hermite(static_cast<unsigned>(n), u / std::sqrt(2.0)) *
         std::exp(-u * u / 4.0);
}

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Half-width large enough to hold mode n beyond its turning point.
double norm_window(int n) { return std::max(12.0, std::sqrt(2.0) * (std::sqrt(2.0 * n + 1.0) + 8.0)); }

}  // namespace

double hg_norm_squared(int n) {
  if (n < 0) throw UsageError("hg_norm_squared: negative order");
  const double w = norm_window(n);
  return integrate([n](double u) { const double v = hg_mode(n, u); return v * v; }, -w, w);
}

double hg_overlap(int n, double x0, double x_m) {
  if (n < 0) throw UsageError("hg_overlap: negative order");
  const double d = x0 - x_m;
  const double lo = std::min(0.0, d) - 12.0, hi = std::max(0.0, d) + 12.0;
  const double raw = integrate([n, d](double u) { return hg_mode(n, u) * hg_mode(0, u - d); }, lo, hi);
  return raw / std::sqrt(hg_norm_squared(n));
}

double hg_overlap_closed_form(int n, double x0, double x_m) {
  if (n < 0) throw UsageError("hg_overlap_closed_form: negative order");
  const double d = x0 - x_m;
  return std::exp(-d * d / 8.0) * std::pow(d / 2.0, n) / std::sqrt(boost::math::factorial<double>(n));
}

RMatrix hg_gram(int n_max) {
  RMatrix g(n_max + 1, n_max + 1);
  std::vector<double> norms(n_max + 1);
  for (int n = 0; n <= n_max; ++n) norms[n] = std::sqrt(hg_norm_squared(n));
  const double w = norm_window(n_max);
  for (int n = 0; n <= n_max; ++n)
    for (int k = n; k <= n_max; ++k)
      g(n, k) = g(k, n) =
          integrate([n, k](double u) { return hg_mode(n, u) * hg_mode(k, u); }, -w, w) / (norms[n] * norms[k]);
  return g;
}

double x_opt(double x_c, double dx, double q) { return x_c + (q - 0.5) * dx; }

double x_opt(const ParamPoint& theta) { return x_opt(theta.at("x_c"), theta.at("dx"), theta.at("q")); }

namespace {

struct Coefficients {
  RVector c, dc;  // normalized overlaps and their derivative in d
};

Coefficients coefficients(double d, const std::vector<double>& norms) {
  const auto n = static_cast<Eigen::Index>(norms.size());
  Coefficients out{RVector(n), RVector(n)};
  const double g = std::exp(-d * d / 8.0);
  double pw = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.c(k) = g * pw / norms[static_cast<std::size_t>(k)];
    pw *= d / std::sqrt(2.0);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    out.dc(k) = (k > 0 ? std::sqrt(static_cast<double>(k)) / 2.0 * out.c(k - 1) : 0.0) - d / 4.0 * out.c(k);
  return out;
}

HermitianOperator sym_outer(const RVector& a, const RVector& b) {
  const RMatrix m = a * b.transpose() + b * a.transpose();
  return HermitianOperator(m.cast<cplx>());
}

void point_domain(std::span<const double> t) {
  for (double v : t)
    if (!std::isfinite(v)) throw DomainError("point-sources: non-finite parameter");
  if (!(t[1] >= 0.0)) throw DomainError("point-sources: dx must be >= 0");
  if (!(t[2] > 0.0 && t[2] < 1.0)) throw DomainError("point-sources: q must lie in (0, 1)");
}

constexpr double kLeakageTol = 1e-8;

}  // namespace

StatisticalModel point_source_model(const PointSourceConfig& cfg) {
  if (!cfg.x_m) throw UsageError("point_source_model: x_m must be set (see point_source_model_at)");
  if (cfg.n_max < 3) throw UsageError("point_source_model: n_max must be >= 3");
  const double xm = *cfg.x_m;
  const int n_max = cfg.n_max;

  std::vector<double> norms(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double q = hg_norm_squared(n);
    const double exact = std::pow(2.0, n) * boost::math::factorial<double>(n);
    if (std::abs(q - exact) > 1e-10 * exact) {
      std::ostringstream os;
      os << "point_source_model: quadrature norm of mode " << n << " is off by " << std::abs(q / exact - 1.0);
      throw ConstructionError(os.str());
    }
    norms[n] = std::sqrt(q);
  }

  auto check_leakage = [n_max](const RVector& c, double x0) {
    const double leak = 1.0 - c.squaredNorm();
    if (leak > kLeakageTol) {
      std::ostringstream os;
      os << "point_source_model: truncation at n_max = " << n_max << " leaks " << leak
         << " of the source at " << x0 << "; raise n_max";
      throw ConstructionError(os.str());
    }
  };

  auto state = [xm, norms, check_leakage](std::span<const double> t) {
    const double xp = t[0] + t[1] / 2.0, xn = t[0] - t[1] / 2.0, q = t[2];
    const Coefficients cp = coefficients(xp - xm, norms), cn = coefficients(xn - xm, norms);
    check_leakage(cp.c, xp);
    check_leakage(cn.c, xn);
    const RMatrix rho = q * cp.c * cp.c.transpose() + (1.0 - q) * cn.c * cn.c.transpose();
    return HermitianOperator(rho.cast<cplx>());
  };
  auto derivs = [xm, norms](std::span<const double> t) {
    const double q = t[2];
    const Coefficients cp = coefficients(t[0] + t[1] / 2.0 - xm, norms);
    const Coefficients cn = coefficients(t[0] - t[1] / 2.0 - xm, norms);
    const HermitianOperator sp = sym_outer(cp.dc, cp.c), sn = sym_outer(cn.dc, cn.c);
    const RMatrix dq = cp.c * cp.c.transpose() - cn.c * cn.c.transpose();
    return std::vector<HermitianOperator>{q * sp + (1.0 - q) * sn, 0.5 * q * sp - 0.5 * (1.0 - q) * sn,
                                          HermitianOperator(dq.cast<cplx>())};
  };
  return StatisticalModel("point-sources", n_max + 1, {"x_c", "dx", "q"}, state, point_domain, derivs);
}

StatisticalModel point_source_model_at(const PointSourceConfig& cfg, const ParamPoint& theta) {
  PointSourceConfig c = cfg;
  if (!c.x_m) c.x_m = x_opt(theta);
  return point_source_model(c);
}

Eigen::Matrix4d optimal_weight_matrix() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  Eigen::Matrix4d w;
  w << 0.0, 1.0 / s6, 1.0 / s2, -1.0 / s3,
       0.0, 1.0 / s6, -1.0 / s2, -1.0 / s3,
       std::sqrt(2.0 / 5.0), std::sqrt(2.0 / 5.0), 0.0, 1.0 / std::sqrt(5.0),
       -std::sqrt(3.0 / 5.0), 2.0 / std::sqrt(15.0), 0.0, std::sqrt(2.0 / 15.0);
  return w;
}

double weight_orthonormality_residual(const Eigen::Matrix4d& w) {
  return (w * w.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
}

Povm optimal_povm_point_sources(const PointSourceConfig& cfg) {
  return optimal_povm_point_sources(cfg, optimal_weight_matrix());
}

Povm optimal_povm_point_sources(const PointSourceConfig& cfg, const Eigen::Matrix4d& w) {
  if (cfg.n_max < 3) throw UsageError("optimal_povm_point_sources: n_max must be >= 3");
  const Eigen::Index dim = cfg.n_max + 1;
  std::vector<HermitianOperator> els;
  HermitianOperator rest = HermitianOperator::identity(dim);
  for (int j = 0; j < 4; ++j) {
    CVector v = CVector::Zero(dim);
    for (int k = 0; k < 4; ++k) v(k) = w(j, k);
    HermitianOperator m(v * v.adjoint());
    rest -= m;
    els.push_back(std::move(m));
  }
  const double lo = min_eigenvalue(rest);
  if (lo < -kPovmTol) {
    std::ostringstream os;
    os << "optimal_povm_point_sources: remainder element has eigenvalue " << lo
       << " (weight rows not orthonormal, residual " << weight_orthonormality_residual(w) << ")";
    throw ConstructionError(os.str());
  }
  els.push_back(std::move(rest));
  return Povm::checked(std::move(els), {"v0", "v1", "v2", "v3", "rest"});
}

}  // namespace menos
