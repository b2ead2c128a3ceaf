#pragma once

// Small interior-point engine for the subproblems this library generates:
//   maximize  c0 + c'y + sum_l w_l log(u_l(y))
//   s.t.      S_b(y) >= 0            (real symmetric affine blocks)
//             e_j(y) >= 0            (affine inequalities)
//             log(u_c(y)) + v_c(y) >= 0
//             lb <= y <= ub
// Primal barrier path-following with log-det / log barriers, damped Newton
// centering, and a Phase I shift variable for finding an interior point.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arisjam::conic {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinExpr {
  double c0 = 0.0;
  std::map<int, double> terms;

  static LinExpr constant(double v) {
    LinExpr e;
    e.c0 = v;
    return e;
  }
  static LinExpr variable(int idx, double coef = 1.0) {
    LinExpr e;
    e.terms[idx] = coef;
    return e;
  }

  void add(int var, double coef) {
    if (coef != 0.0) terms[var] += coef;
  }
  double eval(const Eigen::VectorXd& y) const {
    double v = c0;
    for (const auto& [i, c] : terms) v += c * y(i);
    return v;
  }
  LinExpr& operator+=(const LinExpr& o) {
    c0 += o.c0;
    for (const auto& [i, c] : o.terms) terms[i] += c;
    return *this;
  }
  LinExpr operator+(const LinExpr& o) const {
    LinExpr r = *this;
    r += o;
    return r;
  }
  LinExpr operator-(const LinExpr& o) const {
    LinExpr r = *this;
    r.c0 -= o.c0;
    for (const auto& [i, c] : o.terms) r.terms[i] -= c;
    return r;
  }
  LinExpr operator*(double s) const {
    LinExpr r;
    r.c0 = c0 * s;
    for (const auto& [i, c] : terms) r.terms[i] = c * s;
    return r;
  }
  int max_var() const { return terms.empty() ? -1 : terms.rbegin()->first; }
};

struct LmiBlock {
  std::string label;
  int dim = 0;
  Eigen::MatrixXd c0;
  std::vector<std::pair<int, Eigen::MatrixXd>> coeff;  // variable index -> symmetric coefficient

  Eigen::MatrixXd eval(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd s = c0;
    for (const auto& [i, a] : coeff) s.noalias() += y(i) * a;
    return s;
  }
};

struct LinCon {
  std::string label;
  LinExpr expr;  // expr(y) >= 0
};

struct LogCon {
  std::string label;
  LinExpr arg;  // must stay positive
  LinExpr lin;  // log(arg) + lin >= 0
};

struct LogTerm {
  double weight = 1.0;
  LinExpr arg;
};

struct Problem {
  int n = 0;
  double obj_const = 0.0;
  LinExpr obj;                    // maximized
  std::vector<LogTerm> obj_logs;  // + sum w*log(arg)
  std::vector<LmiBlock> blocks;
  std::vector<LinCon> lincons;
  std::vector<LogCon> logcons;
  Eigen::VectorXd lb, ub;  // empty means unbounded

  int add_var(double lo = -kInf, double hi = kInf) {
    lb.conservativeResize(n + 1);
    ub.conservativeResize(n + 1);
    lb(n) = lo;
    ub(n) = hi;
    return n++;
  }
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kNumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct Options {
  double gap_abs = 1e-9;
  double gap_rel = 1e-8;    // stop when nu/t <= gap_abs + gap_rel*(1+|obj|)
  double gap_accept = 1e-5;  // worst certified gap still returned as optimal on a stall
  double mu = 20.0;
  double t0 = 1.0;
  int max_newton_per_center = 300;
  int max_total_newton = 12000;
  double newton_tol = 1e-9;      // on squared decrement
  double phase1_margin = 1e-7;   // required interior slack out of Phase I
  double phase1_box = 1e8;       // coercivity box on the variables during Phase I
  double feas_margin = 1e-9;     // strictness threshold for accepting a warm start
  double blowup = 1e14;          // iterate escape guard; multipliers scale like 1/radius^2
  int verbosity = 0;
};

struct Result {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd y;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = kInf;
  int newton_iters = 0;
  double final_t = 0.0;
  std::string message;
};

namespace detail {

inline void validate_problem(const Problem& p) {
  auto check_expr = [&](const LinExpr& e, const char* what) {
    for (const auto& [i, c] : e.terms) {
      (void)c;
      if (i < 0 || i >= p.n) throw std::invalid_argument(std::string("conic: bad var index in ") + what);
    }
  };
  if ((int)p.lb.size() != p.n || (int)p.ub.size() != p.n)
    throw std::invalid_argument("conic: bounds size mismatch");
  check_expr(p.obj, "objective");
  for (const auto& t : p.obj_logs) check_expr(t.arg, "objective log term");
  for (const auto& c : p.lincons) check_expr(c.expr, "linear constraint");
  for (const auto& c : p.logcons) {
    check_expr(c.arg, "log constraint");
    check_expr(c.lin, "log constraint");
  }
  for (const auto& b : p.blocks) {
    if (b.dim < 1) throw std::invalid_argument("conic: empty LMI block " + b.label);
    if (b.c0.rows() != b.dim || b.c0.cols() != b.dim)
      throw std::invalid_argument("conic: constant size mismatch in block " + b.label);
    for (const auto& [i, a] : b.coeff) {
      if (i < 0 || i >= p.n) throw std::invalid_argument("conic: bad var index in block " + b.label);
      if (a.rows() != b.dim || a.cols() != b.dim)
        throw std::invalid_argument("conic: coefficient size mismatch in block " + b.label);
    }
  }
  for (int i = 0; i < p.n; ++i)
    if (!(p.lb(i) < p.ub(i))) throw std::invalid_argument("conic: empty box for variable " + std::to_string(i));
}

// barrier complexity parameter: one unit per linear face, dim per block
inline double barrier_nu(const Problem& p) {
  double nu = 0.0;
  for (const auto& b : p.blocks) nu += b.dim;
  nu += (double)p.lincons.size();
  nu += 2.0 * (double)p.logcons.size();
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lb(i))) nu += 1.0;
    if (std::isfinite(p.ub(i))) nu += 1.0;
  }
  return nu;
}

struct Feasibility {
  bool ok = true;
  double worst = kInf;  // smallest slack (eigenvalue for blocks)
  std::string worst_label;
};

// strict feasibility margins at y; worst slack reported for diagnostics
inline Feasibility check_strict(const Problem& p, const Eigen::VectorXd& y, double margin) {
  Feasibility f;
  auto note = [&](double slack, const std::string& label) {
    if (slack < f.worst) {
      f.worst = slack;
      f.worst_label = label;
    }
    if (slack <= margin) f.ok = false;
  };
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lb(i))) note(y(i) - p.lb(i), "lb[" + std::to_string(i) + "]");
    if (std::isfinite(p.ub(i))) note(p.ub(i) - y(i), "ub[" + std::to_string(i) + "]");
  }
  for (const auto& c : p.lincons) note(c.expr.eval(y), c.label);
  for (const auto& t : p.obj_logs) note(t.arg.eval(y), "objective log domain");
  for (const auto& c : p.logcons) {
    double u = c.arg.eval(y);
    note(u, c.label + " (domain)");
    if (u > 0.0) note(std::log(u) + c.lin.eval(y), c.label);
  }
  for (const auto& b : p.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.eval(y), Eigen::EigenvaluesOnly);
    note(es.eigenvalues().minCoeff(), b.label);
  }
  return f;
}

// packed upper triangle with sqrt(2) off-diagonal scaling, so that
// tr(A*B) = pack(A).dot(pack(B)) for symmetric A, B
inline void pack_sym(const Eigen::MatrixXd& a, Eigen::Ref<Eigen::VectorXd> out) {
  static const double rt2 = std::sqrt(2.0);
  const int d = (int)a.rows();
  int k = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < j; ++i) out(k++) = rt2 * 0.5 * (a(i, j) + a(j, i));
    out(k++) = a(j, j);
  }
}

class Centerer {
 public:
  Centerer(const Problem& p, const Options& opt) : p_(p), opt_(opt) {}

  // F(y) = -t*f(y) + B(y); returns +inf when outside the domain
  double value(const Eigen::VectorXd& y, double t) const {
    double f = p_.obj.eval(y);
    for (const auto& tl : p_.obj_logs) {
      double u = tl.arg.eval(y);
      if (u <= 0.0) return kInf;
      f += tl.weight * std::log(u);
    }
    double barrier = 0.0;
    for (int i = 0; i < p_.n; ++i) {
      if (std::isfinite(p_.lb(i))) {
        double s = y(i) - p_.lb(i);
        if (s <= 0.0) return kInf;
        barrier -= std::log(s);
      }
      if (std::isfinite(p_.ub(i))) {
        double s = p_.ub(i) - y(i);
        if (s <= 0.0) return kInf;
        barrier -= std::log(s);
      }
    }
    for (const auto& c : p_.lincons) {
      double s = c.expr.eval(y);
      if (s <= 0.0) return kInf;
      barrier -= std::log(s);
    }
    for (const auto& c : p_.logcons) {
      double u = c.arg.eval(y);
      if (u <= 0.0) return kInf;
      double g = std::log(u) + c.lin.eval(y);
      if (g <= 0.0) return kInf;
      barrier -= std::log(g) + std::log(u);
    }
    for (const auto& b : p_.blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.eval(y));
      if (llt.info() != Eigen::Success) return kInf;
      double ld = 0.0;
      for (int i = 0; i < b.dim; ++i) ld += std::log(llt.matrixLLT()(i, i));
      barrier -= 2.0 * ld;
    }
    return -t * f + barrier;
  }

  // gradient and Hessian of F at an interior y; false if a block factorization fails
  bool derivatives(const Eigen::VectorXd& y, double t, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    const int n = p_.n;
    g.setZero(n);
    h.setZero(n, n);

    auto add_rank1 = [&](const LinExpr& e, double gscale, double hscale) {
      for (const auto& [i, ci] : e.terms) {
        g(i) += gscale * ci;
        for (const auto& [j, cj] : e.terms)
          if (j <= i) h(i, j) += hscale * ci * cj;
      }
    };

    for (const auto& [i, c] : p_.obj.terms) g(i) -= t * c;
    for (const auto& tl : p_.obj_logs) {
      double u = tl.arg.eval(y);
      if (u <= 0.0) return false;
      add_rank1(tl.arg, -t * tl.weight / u, t * tl.weight / (u * u));
    }
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(p_.lb(i))) {
        double s = y(i) - p_.lb(i);
        g(i) -= 1.0 / s;
        h(i, i) += 1.0 / (s * s);
      }
      if (std::isfinite(p_.ub(i))) {
        double s = p_.ub(i) - y(i);
        g(i) += 1.0 / s;
        h(i, i) += 1.0 / (s * s);
      }
    }
    for (const auto& c : p_.lincons) {
      double s = c.expr.eval(y);
      if (s <= 0.0) return false;
      add_rank1(c.expr, -1.0 / s, 1.0 / (s * s));
    }
    for (const auto& c : p_.logcons) {
      double u = c.arg.eval(y);
      if (u <= 0.0) return false;
      double gc = std::log(u) + c.lin.eval(y);
      if (gc <= 0.0) return false;
      // -log(gc) - log(u) with gc = log(u) + v:
      //   grad = -(1/gc) dgc - (1/u) du,   dgc = du/u + dv
      //   hess = (1/gc^2) dgc dgc' + (1/gc + 1) (1/u^2) du du'
      LinExpr dg = c.lin;
      for (const auto& [i, ci] : c.arg.terms) dg.add(i, ci / u);
      add_rank1(dg, -1.0 / gc, 1.0 / (gc * gc));
      add_rank1(c.arg, -1.0 / u, (1.0 / gc + 1.0) / (u * u));
    }

    for (const auto& b : p_.blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.eval(y));
      if (llt.info() != Eigen::Success) return false;
      const auto& l = llt.matrixL();
      const int k = (int)b.coeff.size();
      const int packed = b.dim * (b.dim + 1) / 2;
      Eigen::MatrixXd u(packed, k);
      Eigen::MatrixXd tmp(b.dim, b.dim);
      for (int ci = 0; ci < k; ++ci) {
        tmp = l.solve(b.coeff[ci].second);
        tmp = l.solve(tmp.transpose().eval());  // = L^-1 A L^-T for symmetric A
        g(b.coeff[ci].first) -= tmp.trace();
        pack_sym(tmp, u.col(ci));
      }
      Eigen::MatrixXd hb = u.transpose() * u;
      for (int ci = 0; ci < k; ++ci)
        for (int cj = 0; cj <= ci; ++cj) {
          int i = b.coeff[ci].first, j = b.coeff[cj].first;
          if (i >= j)
            h(i, j) += hb(ci, cj);
          else
            h(j, i) += hb(ci, cj);
        }
    }

    h = h.selfadjointView<Eigen::Lower>();
    return true;
  }

  // damped Newton to (approximate) center; returns squared decrement reached.
  // When watch_idx >= 0, returns early once y(watch_idx) drops below watch_target.
  double center(Eigen::VectorXd& y, double t, double tol, int max_iter, int& newton_count,
                int watch_idx = -1, double watch_target = 0.0) {
    Eigen::VectorXd g, dy;
    Eigen::MatrixXd h;
    double lambda2 = kInf;
    for (int it = 0; it < max_iter; ++it) {
      if (!derivatives(y, t, g, h)) return lambda2;
      double reg = 0.0;
      Eigen::LDLT<Eigen::MatrixXd> ldlt;
      for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::MatrixXd hr = h;
        if (reg > 0.0) hr.diagonal().array() += reg;
        ldlt.compute(hr);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
        reg = (reg == 0.0) ? 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) : reg * 1e3;
      }
      dy = ldlt.solve(-g);
      lambda2 = -g.dot(dy);
      if (!(lambda2 > 0.0)) lambda2 = std::abs(lambda2);
      ++newton_count;
      if (lambda2 * 0.5 <= tol) return lambda2;

      double f0 = value(y, t);
      double slope = g.dot(dy);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 70; ++ls) {
        Eigen::VectorXd yn = y + alpha * dy;
        double f1 = value(yn, t);
        if (std::isfinite(f1) && f1 <= f0 + 0.25 * alpha * slope) {
          y = yn;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) return lambda2;
      if (watch_idx >= 0 && y(watch_idx) < watch_target) return 0.0;
      if (y.cwiseAbs().maxCoeff() > opt_.blowup) return lambda2;
    }
    return lambda2;
  }

 private:
  const Problem& p_;
  const Options& opt_;
};

}  // namespace detail

inline double objective_value(const Problem& p, const Eigen::VectorXd& y) {
  double f = p.obj_const + p.obj.eval(y);
  for (const auto& t : p.obj_logs) f += t.weight * std::log(t.arg.eval(y));
  return f;
}

// Phase I: minimize s over the shifted problem until the shift goes negative
inline Result phase_one(const Problem& p, const Options& opt, const Eigen::VectorXd& y0);

inline Result solve(const Problem& p, const Options& opt = Options(), const Eigen::VectorXd* warm = nullptr) {
  detail::validate_problem(p);
  Result res;

  Eigen::VectorXd y;
  if (warm != nullptr && warm->size() == p.n) {
    y = *warm;
  } else {
    y.setZero(p.n);
  }
  // keep the start strictly inside the box
  for (int i = 0; i < p.n; ++i) {
    double lo = p.lb(i), hi = p.ub(i);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      if (!(y(i) > lo && y(i) < hi)) y(i) = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      if (!(y(i) > lo)) y(i) = lo + 1.0;
    } else if (std::isfinite(hi)) {
      if (!(y(i) < hi)) y(i) = hi - 1.0;
    }
  }

  auto feas = detail::check_strict(p, y, opt.feas_margin);
  if (!feas.ok) {
    Result ph1 = phase_one(p, opt, y);
    res.newton_iters += ph1.newton_iters;
    if (ph1.status != Status::kOptimal) {
      res.status = ph1.status;
      res.message = ph1.message;
      res.y = ph1.y;
      return res;
    }
    y = ph1.y;
  }

  const double nu = detail::barrier_nu(p);
  detail::Centerer centerer(p, opt);
  double t = std::max(opt.t0, 1.0);
  double lambda2 = kInf;
  bool have_cert = false;
  Eigen::VectorXd y_cert;
  double obj_cert = 0.0, gap_cert = kInf, t_cert = 0.0;
  while (true) {
    lambda2 = centerer.center(y, t, opt.newton_tol, opt.max_newton_per_center, res.newton_iters);
    if (y.cwiseAbs().maxCoeff() > opt.blowup) {
      res.status = Status::kUnbounded;
      res.y = y;
      res.message = "an iterate coordinate escaped the blowup guard; unbounded or badly scaled";
      return res;
    }
    double obj = objective_value(p, y);
    double lam = std::sqrt(std::max(lambda2, 0.0));
    // suboptimality certificate, valid near the central path only
    double gap = (lam < 0.25) ? (nu + lam * std::sqrt(nu)) / (t * (1.0 - lam)) : kInf;
    res.y = y;
    res.objective = obj;
    res.gap = gap;
    res.final_t = t;
    if (gap <= opt.gap_abs + opt.gap_rel * (1.0 + std::abs(obj))) {
      res.status = Status::kOptimal;
      return res;
    }
    if (gap < gap_cert) {
      have_cert = true;
      y_cert = y;
      obj_cert = obj;
      gap_cert = gap;
      t_cert = t;
    }
    bool stalled = !(lam < 0.25);
    bool exhausted = res.newton_iters >= opt.max_total_newton;
    if (stalled || exhausted) {
      // Deep centering stages can become too ill conditioned to finish while
      // an earlier stage already certified a usable gap. Hand that point back
      // rather than discarding the solve.
      if (have_cert && gap_cert <= opt.gap_accept * (1.0 + std::abs(obj_cert))) {
        res.status = Status::kOptimal;
        res.y = y_cert;
        res.objective = obj_cert;
        res.gap = gap_cert;
        res.final_t = t_cert;
        res.message = "stopped at reduced accuracy; a deeper centering stage did not converge";
        return res;
      }
      res.status = Status::kNumericalFailure;
      res.message = stalled ? "centering stalled before reaching the target gap"
                            : "newton budget exhausted before reaching the target gap";
      return res;
    }
    t *= opt.mu;
  }
}

inline Result phase_one(const Problem& p, const Options& opt, const Eigen::VectorXd& y0) {
  Result res;
  Problem q;
  q.n = p.n + 1;
  const int sv = p.n;  // shift variable
  q.lb.resize(q.n);
  q.ub.resize(q.n);
  q.lb.head(p.n) = p.lb;
  q.ub.head(p.n) = p.ub;
  // The shifted centering objective is not coercive on unbounded feasible
  // sets (the barrier alone rewards walking out along flat directions), so
  // confine Phase I to a generous box around the start.  Any interior point
  // found inside the box is interior for the original problem as well.
  const double wall = opt.phase1_box * (1.0 + (p.n > 0 ? y0.cwiseAbs().maxCoeff() : 0.0));
  for (int i = 0; i < p.n; ++i) {
    q.lb(i) = std::max(q.lb(i), -wall);
    q.ub(i) = std::min(q.ub(i), wall);
  }
  q.obj = LinExpr::variable(sv, -1.0);

  for (const auto& b : p.blocks) {
    LmiBlock nb = b;
    nb.coeff.emplace_back(sv, Eigen::MatrixXd::Identity(b.dim, b.dim));
    q.blocks.push_back(std::move(nb));
  }
  for (const auto& c : p.lincons) {
    LinCon nc = c;
    nc.expr.add(sv, 1.0);
    q.lincons.push_back(std::move(nc));
  }
  // objective log terms only need their domain opened up
  for (const auto& t : p.obj_logs) {
    LinCon nc;
    nc.label = "objective log domain";
    nc.expr = t.arg;
    nc.expr.add(sv, 1.0);
    q.lincons.push_back(std::move(nc));
  }
  for (const auto& c : p.logcons) {
    LogCon nc;
    nc.label = c.label;
    nc.arg = c.arg;
    nc.arg.add(sv, 1.0);
    nc.lin = c.lin;
    nc.lin.add(sv, 1.0);
    q.logcons.push_back(std::move(nc));
  }

  // initial shift: clear every constraint by a unit margin
  Eigen::VectorXd y(q.n);
  y.head(p.n) = y0;
  double s0 = 1.0;
  for (const auto& b : p.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.eval(y0), Eigen::EigenvaluesOnly);
    s0 = std::max(s0, -es.eigenvalues().minCoeff() + 1.0);
  }
  for (const auto& c : p.lincons) s0 = std::max(s0, -c.expr.eval(y0) + 1.0);
  for (const auto& t : p.obj_logs) s0 = std::max(s0, -t.arg.eval(y0) + 1.0);
  for (const auto& c : p.logcons) {
    double u = c.arg.eval(y0), v = c.lin.eval(y0);
    double lo = std::max(0.0, -u) + 1e-12, hi = std::max(1.0, lo + 1.0);
    while (std::log(u + hi) + v + hi < 1.0 && hi < 1e18) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (std::log(u + mid) + v + mid < 1.0)
        lo = mid;
      else
        hi = mid;
    }
    s0 = std::max(s0, hi);
  }
  y(sv) = s0;
  q.lb(sv) = -1.0;
  q.ub(sv) = s0 + 2.0;

  const double target = -std::max(opt.phase1_margin, 10.0 * opt.feas_margin);
  const double nu = detail::barrier_nu(q);
  detail::Centerer centerer(q, opt);
  double t = 1.0 / std::max(1.0, s0);
  while (true) {
    centerer.center(y, t, opt.newton_tol, opt.max_newton_per_center, res.newton_iters, sv, target);
    if (y(sv) < target) {
      res.status = Status::kOptimal;
      res.y = y.head(p.n);
      return res;
    }
    double gap = nu / t;
    if (gap < 0.25 * std::abs(target)) {
      // certified: cannot push s below the margin -> no interior point
      res.status = Status::kInfeasible;
      res.y = y.head(p.n);
      auto feas = detail::check_strict(p, res.y, 0.0);
      res.message = "no strictly feasible point; tightest constraint: " + feas.worst_label;
      return res;
    }
    if (res.newton_iters >= opt.max_total_newton) {
      res.status = Status::kNumericalFailure;
      res.y = y.head(p.n);
      res.message = "phase one stalled";
      return res;
    }
    t *= opt.mu;
  }
}

/**
 * Sparse text dump of a problem. Sections: vars/bounds, objective, blocks
 * (upper-triangle entries, var -1 for the constant part), linear and log
 * constraints. Stable ordering, one datum per line.
 */
inline void dump(const Problem& p, std::ostream& os) {
  os << "# conic problem dump v1\n";
  os << "# maximize obj_const + obj + sum w*log(arg)\n";
  os << "# s.t. block >= 0, lin >= 0, log(arg)+lin >= 0, lb <= y <= ub\n";
  os << "nvars " << p.n << "\n";
  for (int i = 0; i < p.n; ++i)
    if (std::isfinite(p.lb(i)) || std::isfinite(p.ub(i))) os << "bound " << i << " " << p.lb(i) << " " << p.ub(i) << "\n";
  os << "obj_const " << p.obj_const << " + " << p.obj.c0 << "\n";
  for (const auto& [i, c] : p.obj.terms) os << "obj " << i << " " << c << "\n";
  for (const auto& t : p.obj_logs) {
    os << "objlog " << t.weight << " " << t.arg.c0 << "\n";
    for (const auto& [i, c] : t.arg.terms) os << "objlog_t " << i << " " << c << "\n";
  }
  for (const auto& b : p.blocks) {
    os << "block \"" << b.label << "\" " << b.dim << "\n";
    for (int j = 0; j < b.dim; ++j)
      for (int i = 0; i <= j; ++i)
        if (b.c0(i, j) != 0.0) os << "e -1 " << i << " " << j << " " << b.c0(i, j) << "\n";
    for (const auto& [v, a] : b.coeff)
      for (int j = 0; j < b.dim; ++j)
        for (int i = 0; i <= j; ++i)
          if (a(i, j) != 0.0) os << "e " << v << " " << i << " " << j << " " << a(i, j) << "\n";
    os << "endblock\n";
  }
  for (const auto& c : p.lincons) {
    os << "lin \"" << c.label << "\" " << c.expr.c0 << "\n";
    for (const auto& [i, v] : c.expr.terms) os << "lin_t " << i << " " << v << "\n";
  }
  for (const auto& c : p.logcons) {
    os << "logcon \"" << c.label << "\" " << c.arg.c0 << " " << c.lin.c0 << "\n";
    for (const auto& [i, v] : c.arg.terms) os << "logcon_arg " << i << " " << v << "\n";
    for (const auto& [i, v] : c.lin.terms) os << "logcon_lin " << i << " " << v << "\n";
  }
  os << "end\n";
}

}  // namespace arisjam::conic
