#include "menos/linalg.hpp"

#include "menos/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace menos {

namespace {

template <typename Matrix>
double asymmetry(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Matrix>
void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw UsageError(os.str());
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const CMatrix& m, double tol) {
  require_square(m, "HermitianOperator");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = asymmetry(m);
  if (!(asym <= tol * scale)) {
    std::ostringstream os;
    os << "operator is not Hermitian: max |H - H^dagger| = " << asym << " (scale " << scale << ")";
    throw SymmetryError(os.str());
  }
  m_ = (m + m.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
  if (dim < 1) throw UsageError("identity: dimension must be >= 1");
  return HermitianOperator(CMatrix::Identity(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  if (dim < 1) throw UsageError("zero: dimension must be >= 1");
  return HermitianOperator(CMatrix::Zero(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::projector(const CVector& v) {
  const double n2 = v.squaredNorm();
  if (v.size() < 1 || !(n2 > 0.0)) throw UsageError("projector: zero vector");
  CMatrix p = v * v.adjoint() / n2;
  p = (p + p.adjoint()) / 2.0;
  return HermitianOperator(std::move(p), Trusted{});
}

double HermitianOperator::trace_product(const HermitianOperator& other) const {
  if (other.dim() != dim()) throw UsageError("trace_product: dimension mismatch");
  // Tr[A B] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (m_.array() * other.m_.conjugate().array()).sum().real();
}

double HermitianOperator::max_abs() const { return m_.cwiseAbs().maxCoeff(); }

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (o.dim() != dim()) throw UsageError("HermitianOperator +: dimension mismatch");
  m_ += o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  if (o.dim() != dim()) throw UsageError("HermitianOperator -: dimension mismatch");
  m_ -= o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

RealSymmetricMatrix::RealSymmetricMatrix(const RMatrix& m, double tol) {
  require_square(m, "RealSymmetricMatrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = asymmetry(m);
  if (!(asym <= tol * scale)) {
    std::ostringstream os;
    os << "matrix is not symmetric: max |S - S^T| = " << asym;
    throw SymmetryError(os.str());
  }
  m_ = (m + m.transpose()) / 2.0;
}

RealSymmetricMatrix RealSymmetricMatrix::zero(Eigen::Index dim) {
  return RealSymmetricMatrix(RMatrix::Zero(dim, dim));
}

HermitianEigen eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw Error("eig_hermitian: eigensolver did not converge");
  const Eigen::Index n = h.dim();
  HermitianEigen out{RVector(n), CMatrix(n, n)};
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

HermitianEigen eig_hermitian(const CMatrix& m) { return eig_hermitian(HermitianOperator(m)); }

SymmetricEigen eig_symmetric(const RealSymmetricMatrix& s) {
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(s.matrix());
  if (solver.info() != Eigen::Success) throw Error("eig_symmetric: eigensolver did not converge");
  const Eigen::Index n = s.dim();
  SymmetricEigen out{RVector(n), RMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

double trace_norm(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("trace_norm: eigensolver did not converge");
  return solver.eigenvalues().cwiseAbs().sum();
}

double trace_norm(const CMatrix& m) { return trace_norm(HermitianOperator(m)); }

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  const Eigen::Index na = a.dim();
  const Eigen::Index nb = b.dim();
  CMatrix k(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) k.block(i * nb, j * nb, nb, nb) = a.m_(i, j) * b.m_;
  return HermitianOperator(std::move(k), HermitianOperator::Trusted{});
}

HermitianOperator conjugate_by(const HermitianOperator& h, const CMatrix& u) {
  if (u.cols() != h.dim()) throw UsageError("conjugate_by: dimension mismatch");
  CMatrix r = u * h.m_ * u.adjoint();
  r = (r + r.adjoint()) / 2.0;
  return HermitianOperator(std::move(r), HermitianOperator::Trusted{});
}

double min_eigenvalue(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("min_eigenvalue: eigensolver did not converge");
  return solver.eigenvalues()(0);
}

bool psd_check(const HermitianOperator& h, double tol) { return min_eigenvalue(h) >= -tol; }

double condition_number(const RealSymmetricMatrix& s) {
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(s.matrix(), Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues()(0);
  const double hi = solver.eigenvalues()(s.dim() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace menos
