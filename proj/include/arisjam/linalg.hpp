#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace arisjam {

using cxd = std::complex<double>;

// column-stacking vectorization
inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return Eigen::kroneckerProduct(a, b);
}

// residual of tr(A^H B C D) = vec(A)^H (D^T kron B) vec(C); zero up to rounding
// for conforming shapes A (m x n), B (m x p), C (p x q), D (q x n)
inline double vec_kron_identity_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                                    const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& d) {
  if (a.rows() != b.rows() || b.cols() != c.rows() || c.cols() != d.rows() || d.cols() != a.cols())
    throw std::invalid_argument("vec_kron_identity_gap: shapes do not conform");
  cxd lhs = (a.adjoint() * b * c * d).trace();
  cxd rhs = vec(a).dot(kron(d.transpose(), b) * vec(c));  // Eigen dot conjugates the left side
  return std::abs(lhs - rhs);
}

inline bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  double scale = 1.0 + m.norm();
  return (m - m.adjoint()).norm() <= tol * scale;
}

/**
 * Real embedding of a complex Hermitian matrix:
 *   [[Re H, -Im H], [Im H, Re H]]
 * The result is symmetric and carries each eigenvalue of H twice, so
 * H >= 0 iff realify(H) >= 0. Throws if H is not Hermitian.
 */
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& h, double tol = 1e-9) {
  if (!is_hermitian(h, tol)) throw std::invalid_argument("realify: matrix is not Hermitian");
  const Eigen::Index n = h.rows();
  Eigen::MatrixXd r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = h.real();
  r.topRightCorner(n, n) = -h.imag();
  r.bottomLeftCorner(n, n) = h.imag();
  r.bottomRightCorner(n, n) = h.real();
  // exact symmetry despite rounding in the Hermitian input
  r = ((r + r.transpose()) * 0.5).eval();
  return r;
}

inline double min_eigenvalue(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double min_eigenvalue(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace arisjam
