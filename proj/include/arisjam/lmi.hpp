#pragma once

// Robust-constraint builders. Each one appends an LMI block (or its exact
// degenerate form when an uncertainty radius vanishes) to a conic problem.
// Phase vectors enter as complex affine expressions, so the same builders
// serve the subproblems where they are variables and where they are fixed.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "arisjam/affine.hpp"
#include "arisjam/conic.hpp"
#include "arisjam/linalg.hpp"

namespace arisjam {

inline void add_psd(conic::Problem& p, const std::string& label, const HermAffine& m) {
  p.blocks.push_back(m.realify_block(label));
}

// |theta_i| <= 1 per element, one 2x2 block each
inline void add_unit_modulus_cap(conic::Problem& p, const std::string& label, const CxVec& theta) {
  for (size_t i = 0; i < theta.size(); ++i) {
    HermAffine b(2);
    b.add_entry(0, 0, CxAffine::constant(1.0));
    b.add_entry(1, 1, CxAffine::constant(1.0));
    b.add_entry(0, 1, theta[i].conj());
    add_psd(p, label + "[" + std::to_string(i) + "]", b);
  }
}

struct SignalBoundRefs {
  int rho_a = -1;  // multiplier for the aerial-side error ball, -1 if dropped
  int rho_r = -1;
};

/**
 * Enforces psi >= |theta_a^H (h_a + d_a) + theta_r^H (h_r + d_r)|^2 for all
 * ||d_a|| <= r_a, ||d_r|| <= r_r. Lossless for this uncertainty structure:
 * at the optimum psi equals (|c| + r_a ||theta_a|| + r_r ||theta_r||)^2.
 * Zero-radius (or empty) sides drop out of the block exactly; with both
 * gone this is the plain Schur form of psi >= |c|^2.
 */
inline SignalBoundRefs add_worst_signal_upper_bound(
    conic::Problem& p, const std::string& label, int psi_var, const CxVec& theta_a,
    const Eigen::VectorXcd& h_a, double r_a, const CxVec& theta_r, const Eigen::VectorXcd& h_r,
    double r_r) {
  if (theta_a.size() != (size_t)h_a.size() || theta_r.size() != (size_t)h_r.size())
    throw std::invalid_argument("signal bound: phase/channel length mismatch");
  if (r_a < 0.0 || r_r < 0.0) throw std::invalid_argument("signal bound: negative radius");

  const int na = (int)theta_a.size(), nr = (int)theta_r.size();
  const bool with_a = r_a > 0.0 && na > 0;
  const bool with_r = r_r > 0.0 && nr > 0;

  SignalBoundRefs refs;
  if (with_a) refs.rho_a = p.add_var();
  if (with_r) refs.rho_r = p.add_var();

  CxAffine chat = cx_dot(theta_a, h_a) + cx_dot(theta_r, h_r);

  const int off_a = 2;
  const int off_r = 2 + (with_a ? na : 0);
  const int dim = off_r + (with_r ? nr : 0);
  HermAffine m(dim);

  CxAffine corner = CxAffine::variable(psi_var);
  if (with_a) corner += CxAffine::variable(refs.rho_a, -1.0);
  if (with_r) corner += CxAffine::variable(refs.rho_r, -1.0);
  m.add_entry(0, 0, corner);
  m.add_entry(0, 1, chat.conj());
  m.add_entry(1, 1, CxAffine::constant(1.0));
  if (with_a) {
    for (int i = 0; i < na; ++i) {
      m.add_entry(1, off_a + i, theta_a[i].conj() * r_a);
      m.add_entry(off_a + i, off_a + i, CxAffine::variable(refs.rho_a));
    }
  }
  if (with_r) {
    for (int i = 0; i < nr; ++i) {
      m.add_entry(1, off_r + i, theta_r[i].conj() * r_r);
      m.add_entry(off_r + i, off_r + i, CxAffine::variable(refs.rho_r));
    }
  }
  add_psd(p, label, m);
  return refs;
}

// multiplier values that keep the signal bound strictly feasible when psi
// exceeds the worst-case power: at the lossless optimum each multiplier is
// r ||theta|| (|c| + r_a ||theta_a|| + r_r ||theta_r||)
inline std::pair<double, double> signal_bound_multiplier_seed(const Eigen::VectorXcd& theta_a,
                                                              const Eigen::VectorXcd& h_a,
                                                              double r_a,
                                                              const Eigen::VectorXcd& theta_r,
                                                              const Eigen::VectorXcd& h_r,
                                                              double r_r) {
  double c = std::abs(theta_a.dot(h_a) + theta_r.dot(h_r));
  double reach = c + r_a * theta_a.norm() + r_r * theta_r.norm();
  return {r_a * theta_a.norm() * reach, r_r * theta_r.norm() * reach};
}

// first column is the direct channel, then the conjugated cascade matrix;
// stacking matches the Kronecker ordering used by jam_power_matrix below
inline Eigen::VectorXcd stack_jam_channels(const Eigen::VectorXcd& h_j,
                                           const Eigen::MatrixXcd& h_jr) {
  Eigen::MatrixXcd t(h_j.size(), 1 + h_jr.rows());
  t.col(0) = h_j;
  if (h_jr.rows() > 0) t.rightCols(h_jr.rows()) = h_jr.adjoint();
  return vec(t);
}

// tt tt^H for tt = [1; theta_r], the exact reflection outer product
inline Eigen::MatrixXcd theta_tilde_outer(const Eigen::VectorXcd& theta_r) {
  Eigen::VectorXcd tt(theta_r.size() + 1);
  tt(0) = 1.0;
  tt.tail(theta_r.size()) = theta_r;
  return tt * tt.adjoint();
}

/**
 * Affine surrogate of tt tt^H around tt0: tt0 tt^H + tt tt0^H - tt0 tt0^H.
 * Always dominated by tt tt^H (their difference is -(tt-tt0)(tt-tt0)^H) and
 * equal at tt = tt0, so jamming powers built from it are safe lower bounds.
 */
inline HermAffine reflection_outer_surrogate(const CxVec& tt, const Eigen::VectorXcd& tt0) {
  if (tt.size() != (size_t)tt0.size())
    throw std::invalid_argument("reflection surrogate: size mismatch");
  const int n = (int)tt.size();
  HermAffine m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      m.add_entry(i, j, tt[j].conj() * tt0(i) + tt[i] * std::conj(tt0(j)) -
                            CxAffine::constant(tt0(i) * std::conj(tt0(j))));
  return m;
}

// (outer^T kron Z)(y): the quadratic form of the stacked jamming channels
// that equals the received jamming power. Use with theta_tilde_outer when
// the phases are fixed, or reflection_outer_surrogate when they vary.
inline HermAffine jam_power_matrix(const Eigen::MatrixXcd& outer, const HermAffine& z) {
  return kron_t(outer, z);
}
inline HermAffine jam_power_matrix(const HermAffine& outer, const Eigen::MatrixXcd& z) {
  return kron_t(outer, z);
}

struct JamBoundRefs {
  int eta_j = -1;  // multiplier for the direct-channel ball, -1 if dropped
  int eta_jr = -1;
};

/**
 * Enforces psi <= (v + d)^H Omega(y) (v + d) for every error d whose first
 * mj entries have norm at most r_j and whose remaining entries have norm at
 * most r_jr, via the S-procedure. Omega must be PSD-valued on the feasible
 * set. Zero-radius groups are eliminated by restricting the block to the
 * still-uncertain coordinates; with both gone the bound degenerates to the
 * exact linear inequality v^H Omega v >= psi.
 */
inline JamBoundRefs add_worst_jam_lower_bound(conic::Problem& p, const std::string& label,
                                              int psi_var, const HermAffine& omega,
                                              const Eigen::VectorXcd& v, int mj, double r_j,
                                              double r_jr) {
  const int d = omega.dim();
  if ((int)v.size() != d) throw std::invalid_argument("jam bound: vector/matrix size mismatch");
  if (mj < 0 || mj > d) throw std::invalid_argument("jam bound: bad direct-group size");
  if (r_j < 0.0 || r_jr < 0.0) throw std::invalid_argument("jam bound: negative radius");

  const bool with_j = r_j > 0.0 && mj > 0;
  const bool with_jr = r_jr > 0.0 && d > mj;

  JamBoundRefs refs;
  conic::LinExpr slack = omega.quad_form(v);  // v^H Omega v
  slack.add(psi_var, -1.0);

  if (!with_j && !with_jr) {
    conic::LinCon con;
    con.label = label;
    con.expr = slack;
    p.lincons.push_back(std::move(con));
    return refs;
  }

  if (with_j) {
    refs.eta_j = p.add_var(0.0);
    slack.add(refs.eta_j, -r_j * r_j);
  }
  if (with_jr) {
    refs.eta_jr = p.add_var(0.0);
    slack.add(refs.eta_jr, -r_jr * r_jr);
  }

  // coordinates that still carry uncertainty
  std::vector<int> keep;
  if (with_j)
    for (int i = 0; i < mj; ++i) keep.push_back(i);
  if (with_jr)
    for (int i = mj; i < d; ++i) keep.push_back(i);
  const int kd = (int)keep.size();

  HermAffine m(kd + 1);
  HermAffine top = omega.submatrix(keep);
  for (const auto& [var, a] : top.coeffs()) {
    Eigen::MatrixXcd pad = Eigen::MatrixXcd::Zero(kd + 1, kd + 1);
    pad.topLeftCorner(kd, kd) = a;
    m.add_coeff(var, pad);
  }
  {
    Eigen::MatrixXcd pad = Eigen::MatrixXcd::Zero(kd + 1, kd + 1);
    pad.topLeftCorner(kd, kd) = top.constant_part();
    m.add_const(pad);
  }
  for (int i = 0; i < kd; ++i) {
    if (with_j && keep[i] < mj) m.add_entry(i, i, CxAffine::variable(refs.eta_j));
    if (with_jr && keep[i] >= mj) m.add_entry(i, i, CxAffine::variable(refs.eta_jr));
  }
  CxVec ov = omega.mul(v);
  for (int i = 0; i < kd; ++i) m.add_entry(i, kd, ov[keep[i]]);
  {
    // bottom-right scalar: v^H Omega v - psi - eta_j r_j^2 - eta_jr r_jr^2
    CxAffine corner;
    corner += CxAffine::constant(slack.c0);
    for (const auto& [var, coef] : slack.terms) corner += CxAffine::variable(var, coef);
    m.add_entry(kd, kd, corner);
  }
  add_psd(p, label, m);
  return refs;
}

struct JamMultiplierSeed {
  double eta_j = 0.0;
  double eta_jr = 0.0;
  bool ok = false;
};

/**
 * Multiplier values that make the jam bound block strictly PSD at the given
 * numeric point. The block is affine in the multipliers, so its smallest
 * eigenvalue is jointly concave; the most interior pair is found by a nested
 * ternary search (in log space, since the corner entry allows multipliers
 * across many decades). A failed search leaves ok = false, in which case the
 * solver's feasibility phase has to take over.
 */
inline JamMultiplierSeed jam_bound_multiplier_seed(const Eigen::MatrixXcd& omega,
                                                   const Eigen::VectorXcd& v, double psi, int mj,
                                                   double r_j, double r_jr) {
  const int d = (int)omega.rows();
  const bool with_j = r_j > 0.0 && mj > 0;
  const bool with_jr = r_jr > 0.0 && d > mj;
  JamMultiplierSeed seed;
  if (!with_j && !with_jr) {
    seed.ok = true;
    return seed;
  }

  Eigen::VectorXcd ov = omega * v;
  double q = std::real((v.adjoint() * omega * v).value());
  double budget = q - psi;
  if (budget <= 0.0) return seed;

  // evaluate on the same compressed coordinates the constraint builder keeps
  std::vector<int> keep;
  if (with_j)
    for (int i = 0; i < mj; ++i) keep.push_back(i);
  if (with_jr)
    for (int i = mj; i < d; ++i) keep.push_back(i);
  const int kd = (int)keep.size();

  Eigen::MatrixXcd base(kd + 1, kd + 1);
  for (int i = 0; i < kd; ++i)
    for (int j = 0; j < kd; ++j) base(i, j) = omega(keep[i], keep[j]);
  for (int i = 0; i < kd; ++i) {
    base(i, kd) = ov(keep[i]);
    base(kd, i) = std::conj(ov(keep[i]));
  }
  base(kd, kd) = budget;
  const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());

  auto min_eig = [&](double ej, double ejr) {
    double corner = budget - ej * r_j * r_j - ejr * r_jr * r_jr;
    if (!(corner > 0.0)) return -1e300;
    Eigen::MatrixXcd m = base;
    for (int i = 0; i < kd; ++i) m(i, i) += (keep[i] < mj) ? ej : ejr;
    m(kd, kd) = corner;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };

  // maximize over the trailing-group multiplier with the direct one held
  // fixed; partial maximization keeps the outer search concave
  auto best_jr = [&](double ej) {
    if (!with_jr) return std::make_pair(min_eig(ej, 0.0), 0.0);
    double room = budget - ej * r_j * r_j;
    if (!(room > 0.0)) return std::make_pair(-1e300, 0.0);
    double hi = std::log(room / (r_jr * r_jr)), lo = hi - 70.0;
    for (int it = 0; it < 48; ++it) {
      double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
      if (min_eig(ej, std::exp(a)) < min_eig(ej, std::exp(b)))
        lo = a;
      else
        hi = b;
    }
    double ejr = std::exp(0.5 * (lo + hi));
    return std::make_pair(min_eig(ej, ejr), ejr);
  };

  double ej = 0.0, ejr = 0.0, val;
  if (!with_j) {
    std::tie(val, ejr) = best_jr(0.0);
  } else {
    double hi = std::log(budget / (r_j * r_j)), lo = hi - 70.0;
    for (int it = 0; it < 48; ++it) {
      double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
      if (best_jr(std::exp(a)).first < best_jr(std::exp(b)).first)
        lo = a;
      else
        hi = b;
    }
    ej = std::exp(0.5 * (lo + hi));
    std::tie(val, ejr) = best_jr(ej);
  }
  if (val > 1e-11 * scale) {
    seed.eta_j = ej;
    seed.eta_jr = ejr;
    seed.ok = true;
  }
  return seed;
}

/**
 * Enforces psi >= || zsqrt w(y) ||^2 with w complex affine and zsqrt a
 * constant matrix (typically the PSD square root of a fixed covariance),
 * as a Schur block against the identity.
 */
inline void add_quad_upper_bound(conic::Problem& p, const std::string& label, int psi_var,
                                 const Eigen::MatrixXcd& zsqrt, const CxVec& w) {
  if ((size_t)zsqrt.cols() != w.size())
    throw std::invalid_argument("quad upper bound: size mismatch");
  const int m = (int)zsqrt.rows();
  HermAffine b(m + 1);
  b.add_entry(0, 0, CxAffine::variable(psi_var));
  for (int i = 0; i < m; ++i) {
    CxAffine bi;
    for (int j = 0; j < (int)w.size(); ++j) bi += w[j] * zsqrt(i, j);
    b.add_entry(0, i + 1, bi.conj());
    b.add_entry(i + 1, i + 1, CxAffine::constant(1.0));
  }
  add_psd(p, label, b);
}

// Hermitian PSD square root via the spectral decomposition
inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& z, double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(z);
  double lmax = es.eigenvalues().size() > 0 ? es.eigenvalues().maxCoeff() : 0.0;
  if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() < -tol * std::max(1.0, lmax))
    throw std::invalid_argument("psd_sqrt: matrix has a negative eigenvalue");
  Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace arisjam
