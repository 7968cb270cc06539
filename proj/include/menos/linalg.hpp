#pragma once

#include <Eigen/Dense>

#include <complex>

namespace menos {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Relative to max(1, max |entry|).
inline constexpr double kHermitianTol = 1e-12;

/// Dense complex Hermitian matrix.
///
/// Inputs whose asymmetry is within tolerance are symmetrized to (H + H^dagger)/2;
/// anything further from Hermitian is rejected with SymmetryError. Arithmetic
/// between Hermitian operators (sums, real scalings) is closed and skips the check.
class HermitianOperator {
 public:
  explicit HermitianOperator(const CMatrix& m, double tol = kHermitianTol);

  static HermitianOperator identity(Eigen::Index dim);
  static HermitianOperator zero(Eigen::Index dim);
  // |v><v| / <v|v>
  static HermitianOperator projector(const CVector& v);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  // Tr[this * other]; real for two Hermitian operators.
  double trace_product(const HermitianOperator& other) const;
  double max_abs() const;

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

 private:
  struct Trusted {};
  HermitianOperator(CMatrix m, Trusted) : m_(std::move(m)) {}

  friend HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
  friend HermitianOperator conjugate_by(const HermitianOperator& h, const CMatrix& u);

  CMatrix m_;
};

/// Real symmetric P x P matrix (Fisher-type quantities).
class RealSymmetricMatrix {
 public:
  explicit RealSymmetricMatrix(const RMatrix& m, double tol = kHermitianTol);
  static RealSymmetricMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const RMatrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

 private:
  RMatrix m_;
};

struct HermitianEigen {
  RVector values;   // descending
  CMatrix vectors;  // unitary, column k belongs to values[k]
};

struct SymmetricEigen {
  RVector values;   // descending
  RMatrix vectors;  // orthogonal, column k belongs to values[k]
};

HermitianEigen eig_hermitian(const HermitianOperator& h);
// Validates Hermiticity first (SymmetryError).
HermitianEigen eig_hermitian(const CMatrix& m);
SymmetricEigen eig_symmetric(const RealSymmetricMatrix& s);

// Sum of |eigenvalues|.
double trace_norm(const HermitianOperator& h);
double trace_norm(const CMatrix& m);

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);

// U h U^dagger
HermitianOperator conjugate_by(const HermitianOperator& h, const CMatrix& u);

double min_eigenvalue(const HermitianOperator& h);
bool psd_check(const HermitianOperator& h, double tol);

// Largest over smallest eigenvalue; +inf when the smallest is <= 0.
double condition_number(const RealSymmetricMatrix& s);

}  // namespace menos
