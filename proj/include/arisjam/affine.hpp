#pragma once

// Complex affine expressions over real decision variables, and Hermitian
// affine matrix maps. The robust-constraint builders assemble matrices in
// this form; lowering to the real solver goes through realify().

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "arisjam/conic.hpp"
#include "arisjam/linalg.hpp"

namespace arisjam {

// c0 + sum_i y[i] * g[i], with y real and g complex
class CxAffine {
 public:
  CxAffine() = default;
  explicit CxAffine(cxd c) : c0_(c) {}

  static CxAffine constant(cxd c) { return CxAffine(c); }
  static CxAffine variable(int idx, cxd scale = 1.0) {
    CxAffine e;
    e.terms_[idx] = scale;
    return e;
  }

  cxd constant_part() const { return c0_; }
  const std::map<int, cxd>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  cxd eval(const Eigen::VectorXd& y) const {
    cxd v = c0_;
    for (const auto& [i, g] : terms_) v += g * y(i);
    return v;
  }

  CxAffine& operator+=(const CxAffine& o) {
    c0_ += o.c0_;
    for (const auto& [i, g] : o.terms_) terms_[i] += g;
    return *this;
  }
  CxAffine operator+(const CxAffine& o) const {
    CxAffine r = *this;
    r += o;
    return r;
  }
  CxAffine operator-(const CxAffine& o) const {
    CxAffine r = *this;
    r.c0_ -= o.c0_;
    for (const auto& [i, g] : o.terms_) r.terms_[i] -= g;
    return r;
  }
  CxAffine operator*(cxd s) const {
    CxAffine r;
    r.c0_ = c0_ * s;
    for (const auto& [i, g] : terms_) r.terms_[i] = g * s;
    return r;
  }
  CxAffine conj() const {
    CxAffine r;
    r.c0_ = std::conj(c0_);
    for (const auto& [i, g] : terms_) r.terms_[i] = std::conj(g);
    return r;
  }

  // real part as a solver expression; imaginary coefficients are kept out
  conic::LinExpr real_expr() const {
    conic::LinExpr e;
    e.c0 = c0_.real();
    for (const auto& [i, g] : terms_) e.add(i, g.real());
    return e;
  }

 private:
  cxd c0_{0.0, 0.0};
  std::map<int, cxd> terms_;
};

using CxVec = std::vector<CxAffine>;

inline CxVec cx_constant_vec(const Eigen::VectorXcd& v) {
  CxVec out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = CxAffine::constant(v(i));
  return out;
}

inline Eigen::VectorXcd eval(const CxVec& v, const Eigen::VectorXd& y) {
  Eigen::VectorXcd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out(i) = v[i].eval(y);
  return out;
}

// sum_i conj(a_i) * b_i where exactly one side may carry variables
inline CxAffine cx_dot(const CxVec& a, const Eigen::VectorXcd& b) {
  CxAffine r;
  for (size_t i = 0; i < a.size(); ++i) r += a[i].conj() * b((int)i);
  return r;
}
inline CxAffine cx_dot(const Eigen::VectorXcd& a, const CxVec& b) {
  CxAffine r;
  for (size_t i = 0; i < b.size(); ++i) r += b[i] * std::conj(a((int)i));
  return r;
}

/**
 * Hermitian-valued affine map C0 + sum_i y[i] * A[i]. Entries are set pair-
 * wise: add_entry(i, j, x) contributes x at (i,j) and conj(x) at (j,i), so
 * callers touch each unordered index pair once (diagonal entries must be
 * real affine).
 */
class HermAffine {
 public:
  explicit HermAffine(int dim) : dim_(dim), c0_(Eigen::MatrixXcd::Zero(dim, dim)) {}

  int dim() const { return dim_; }
  const Eigen::MatrixXcd& constant_part() const { return c0_; }
  const std::map<int, Eigen::MatrixXcd>& coeffs() const { return coeff_; }

  void add_entry(int i, int j, const CxAffine& x) {
    if (i == j) {
      c0_(i, i) += x.constant_part().real();
      for (const auto& [v, g] : x.terms()) coeff_ref(v)(i, i) += g.real();
      return;
    }
    c0_(i, j) += x.constant_part();
    c0_(j, i) += std::conj(x.constant_part());
    for (const auto& [v, g] : x.terms()) {
      auto& a = coeff_ref(v);
      a(i, j) += g;
      a(j, i) += std::conj(g);
    }
  }

  void add_const(const Eigen::MatrixXcd& m) {
    if (m.rows() != dim_ || m.cols() != dim_) throw std::invalid_argument("HermAffine: size mismatch");
    c0_ += m;
  }
  void add_coeff(int var, const Eigen::MatrixXcd& m) {
    if (m.rows() != dim_ || m.cols() != dim_) throw std::invalid_argument("HermAffine: size mismatch");
    coeff_ref(var) += m;
  }

  Eigen::MatrixXcd eval(const Eigen::VectorXd& y) const {
    Eigen::MatrixXcd m = c0_;
    for (const auto& [v, a] : coeff_) m += y(v) * a;
    return m;
  }

  // Hermitian transpose equals entrywise conjugation
  HermAffine transposed() const {
    HermAffine r(dim_);
    r.c0_ = c0_.conjugate();
    for (const auto& [v, a] : coeff_) r.coeff_[v] = a.conjugate();
    return r;
  }

  HermAffine submatrix(const std::vector<int>& idx) const {
    HermAffine r((int)idx.size());
    auto take = [&idx](const Eigen::MatrixXcd& m) {
      Eigen::MatrixXcd s(idx.size(), idx.size());
      for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = 0; b < idx.size(); ++b) s(a, b) = m(idx[a], idx[b]);
      return s;
    };
    r.c0_ = take(c0_);
    for (const auto& [v, a] : coeff_) r.coeff_[v] = take(a);
    return r;
  }

  // M(y) * v for constant v
  CxVec mul(const Eigen::VectorXcd& v) const {
    CxVec out(dim_);
    Eigen::VectorXcd cv = c0_ * v;
    for (int i = 0; i < dim_; ++i) out[i] = CxAffine::constant(cv(i));
    for (const auto& [var, a] : coeff_) {
      Eigen::VectorXcd av = a * v;
      for (int i = 0; i < dim_; ++i) out[i] += CxAffine::variable(var, av(i));
    }
    return out;
  }

  // v^H M(y) v, real by Hermitian symmetry
  conic::LinExpr quad_form(const Eigen::VectorXcd& v) const {
    conic::LinExpr e;
    e.c0 = (v.adjoint() * c0_ * v).value().real();
    for (const auto& [var, a] : coeff_) e.add(var, (v.adjoint() * a * v).value().real());
    return e;
  }

  // lowering to the real solver block
  conic::LmiBlock realify_block(const std::string& label, double herm_tol = 1e-9) const {
    conic::LmiBlock b;
    b.label = label;
    b.dim = 2 * dim_;
    b.c0 = arisjam::realify(c0_, herm_tol);
    b.coeff.reserve(coeff_.size());
    for (const auto& [v, a] : coeff_) b.coeff.emplace_back(v, arisjam::realify(a, herm_tol));
    return b;
  }

 private:
  Eigen::MatrixXcd& coeff_ref(int var) {
    auto it = coeff_.find(var);
    if (it == coeff_.end()) it = coeff_.emplace(var, Eigen::MatrixXcd::Zero(dim_, dim_)).first;
    return it->second;
  }

  int dim_;
  Eigen::MatrixXcd c0_;
  std::map<int, Eigen::MatrixXcd> coeff_;
};

// d^T kron Z(y) for constant d
inline HermAffine kron_t(const Eigen::MatrixXcd& d, const HermAffine& z) {
  HermAffine r((int)d.rows() * z.dim());
  r.add_const(kron(d.transpose(), z.constant_part()));
  for (const auto& [v, a] : z.coeffs()) r.add_coeff(v, kron(d.transpose(), a));
  return r;
}

// D(y)^T kron z for constant z
inline HermAffine kron_t(const HermAffine& d, const Eigen::MatrixXcd& z) {
  HermAffine r(d.dim() * (int)z.rows());
  r.add_const(kron(d.constant_part().transpose(), z));
  for (const auto& [v, a] : d.coeffs()) r.add_coeff(v, kron(a.transpose(), z));
  return r;
}

/**
 * Bookkeeping for structured variables inside one conic problem: complex
 * vectors are (re, im) pairs per entry, Hermitian matrices are a real
 * diagonal plus (re, im) pairs above it.
 */
struct CxVecVars {
  int base = 0;
  int n = 0;

  CxVec exprs() const {
    CxVec v((size_t)n);
    for (int i = 0; i < n; ++i)
      v[i] = CxAffine::variable(base + 2 * i) + CxAffine::variable(base + 2 * i + 1, cxd(0.0, 1.0));
    return v;
  }
  Eigen::VectorXcd value(const Eigen::VectorXd& y) const {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = cxd(y(base + 2 * i), y(base + 2 * i + 1));
    return v;
  }
  void seed(Eigen::VectorXd& y, const Eigen::VectorXcd& v) const {
    for (int i = 0; i < n; ++i) {
      y(base + 2 * i) = v(i).real();
      y(base + 2 * i + 1) = v(i).imag();
    }
  }
};

inline CxVecVars add_cx_vector(conic::Problem& p, int n, double lo = -conic::kInf, double hi = conic::kInf) {
  CxVecVars v;
  v.base = p.n;
  v.n = n;
  for (int i = 0; i < 2 * n; ++i) p.add_var(lo, hi);
  return v;
}

struct HermVars {
  int base = 0;
  int m = 0;

  // variable order: columns j = 0..m-1; within a column the off-diagonal
  // (re, im) pairs for i < j, then the real diagonal entry
  HermAffine affine() const {
    HermAffine h(m);
    int k = base;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < j; ++i) {
        h.add_entry(i, j, CxAffine::variable(k) + CxAffine::variable(k + 1, cxd(0.0, 1.0)));
        k += 2;
      }
      h.add_entry(j, j, CxAffine::variable(k++));
    }
    return h;
  }
  Eigen::MatrixXcd value(const Eigen::VectorXd& y) const {
    Eigen::MatrixXcd z(m, m);
    int k = base;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < j; ++i) {
        z(i, j) = cxd(y(k), y(k + 1));
        z(j, i) = std::conj(z(i, j));
        k += 2;
      }
      z(j, j) = y(k++);
    }
    return z;
  }
  void seed(Eigen::VectorXd& y, const Eigen::MatrixXcd& z) const {
    int k = base;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < j; ++i) {
        y(k) = z(i, j).real();
        y(k + 1) = z(i, j).imag();
        k += 2;
      }
      y(k++) = z(j, j).real();
    }
  }
  conic::LinExpr trace_expr() const {
    conic::LinExpr e;
    int k = base;
    for (int j = 0; j < m; ++j) {
      k += 2 * j;
      e.add(k++, 1.0);
    }
    return e;
  }
  int count() const { return m * m; }
};

inline HermVars add_hermitian(conic::Problem& p, int m) {
  HermVars v;
  v.base = p.n;
  v.m = m;
  for (int i = 0; i < m * m; ++i) p.add_var();
  return v;
}

}  // namespace arisjam
