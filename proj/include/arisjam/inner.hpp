#pragma once

// Robust secrecy-rate maximization for a fixed platform placement: block
// coordinate descent over the jammer covariance, the aerial RIS phases and
// the fixed RIS phases. Each block solves a sequence of conic programs whose
// surrogates are tight at the current iterate, so the certified worst-case
// rate cannot decrease. All programs are assembled in scaled units and the
// returned certificates are converted back.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "arisjam/affine.hpp"
#include "arisjam/channel.hpp"
#include "arisjam/conic.hpp"
#include "arisjam/eval.hpp"
#include "arisjam/linalg.hpp"
#include "arisjam/lmi.hpp"
#include "arisjam/rng.hpp"
#include "arisjam/scenario.hpp"
#include "arisjam/units.hpp"

namespace arisjam {

// surrogate subproblems feed tangent refreshes with 1e-4 scale tolerances,
// so chasing the solver's tightest gap wastes centering stages
inline conic::Options inner_conic_defaults() {
  conic::Options o;
  o.gap_rel = 1e-7;
  return o;
}

struct InnerOptions {
  int max_outer = 20;        // coordinate sweeps
  double outer_tol = 1e-4;   // stop when the stacked strategy stops moving
  int max_block_iters = 30;  // surrogate refresh loop inside one block
  double t_tol = 1e-5;       // jamming block: relative drift of the tangent points
  double phase_tol = 1e-4;   // phase blocks: iterate movement
  double penalty_init = 10.0;
  double penalty_max = 1e4;
  double slack_tol = 1e-4;  // total unit-modulus slack required at convergence
  // the jamming block also tries an ascent from a near-silent covariance, so
  // a full-power start cannot trap it on the drowned plateau; callers doing
  // many cheap warm-started solves can turn the second start off
  bool jam_quiet_start = true;
  int max_restarts = 5;     // on solver failure during the first sweep
  conic::Options conic = inner_conic_defaults();
  // called with every assembled program and a stage tag, for offline dumps
  std::function<void(const conic::Problem&, const std::string&)> inspect;
};

struct InnerResult {
  Strategy strategy;              // unit-modulus phases, covariance in watts
  double robust_rate_bits = 0.0;  // exact worst-case secrecy rate at strategy
  double dest_sinr = 0.0;
  std::vector<double> worst_eve_sinr;  // per eavesdropper, over its error balls
  std::vector<double> trace_bits;      // best certified rate after each sweep
  int outer_iters = 0;
  int solver_calls = 0;
  int restarts = 0;
  bool converged = false;
  std::string note;
};

// elementwise phase projection; zero entries map to 1
inline Eigen::VectorXcd unit_modulus_projection(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    out(i) = a > 1e-300 ? v(i) / a : cxd(1.0, 0.0);
  }
  return out;
}

namespace detail {

/**
 * The conic programs are assembled with signal channels divided by their RMS
 * magnitude, jamming channels likewise, and the covariance divided by the
 * power budget. Folding the scales into the source and noise powers leaves
 * every SINR unchanged, so evaluation routines work on either copy.
 */
struct ScaledContext {
  Scenario scen;
  ChannelSet chan;
  double sig_scale = 1.0;
  double jam_scale = 1.0;
  double power_scale = 1.0;  // jammer budget, 1 when jamming is absent
};

inline double rms_or_one(double sumsq, std::ptrdiff_t count) {
  if (count <= 0) return 1.0;
  double r = std::sqrt(sumsq / (double)count);
  return r > 0.0 ? r : 1.0;
}

inline ScaledContext make_scaled(const Scenario& s, const ChannelSet& c) {
  double sig_sq = c.h_sad.squaredNorm() + c.h_srd.squaredNorm();
  std::ptrdiff_t sig_n = c.h_sad.size() + c.h_srd.size();
  double jam_sq = c.h_jd.squaredNorm() + c.h_jrd.squaredNorm();
  std::ptrdiff_t jam_n = c.h_jd.size() + c.h_jrd.size();
  for (const auto& e : c.eves) {
    sig_sq += e.h_sak.est.squaredNorm() + e.h_srk.est.squaredNorm();
    sig_n += e.h_sak.est.size() + e.h_srk.est.size();
    jam_sq += e.h_jk.est.squaredNorm() + e.h_jrk.est.squaredNorm();
    jam_n += e.h_jk.est.size() + e.h_jrk.est.size();
  }

  ScaledContext cx;
  cx.sig_scale = rms_or_one(sig_sq, sig_n);
  cx.jam_scale = rms_or_one(jam_sq, jam_n);
  bool jam_active = c.m > 0 && s.jammer_power_w > 0.0;
  cx.power_scale = jam_active ? s.jammer_power_w : 1.0;

  cx.chan = c;
  cx.chan.h_sad /= cx.sig_scale;
  cx.chan.h_srd /= cx.sig_scale;
  cx.chan.h_jd /= cx.jam_scale;
  cx.chan.h_jrd /= cx.jam_scale;
  auto shrink_vec = [](ChannelSet::EveChannels&, UncertainVec& u, double f) {
    u.est /= f;
    u.truth /= f;
    u.radius /= f;
  };
  for (auto& e : cx.chan.eves) {
    shrink_vec(e, e.h_sak, cx.sig_scale);
    shrink_vec(e, e.h_srk, cx.sig_scale);
    shrink_vec(e, e.h_jk, cx.jam_scale);
    e.h_jrk.est /= cx.jam_scale;
    e.h_jrk.truth /= cx.jam_scale;
    e.h_jrk.radius /= cx.jam_scale;
  }

  double jam_pow = cx.power_scale * cx.jam_scale * cx.jam_scale;
  cx.scen = s;
  cx.scen.source_power_w = s.source_power_w * cx.sig_scale * cx.sig_scale / jam_pow;
  cx.scen.noise_power_w = s.noise_power_w / jam_pow;
  cx.scen.jammer_power_w = jam_active ? 1.0 : 0.0;
  return cx;
}

inline Strategy to_scaled(const ScaledContext& cx, const Strategy& st) {
  Strategy r = st;
  r.z /= cx.power_scale;
  return r;
}

inline Strategy from_scaled(const ScaledContext& cx, const Strategy& st) {
  Strategy r = st;
  r.z *= cx.power_scale;
  return r;
}

// 2 Re(conj(a) x) as a solver expression
inline conic::LinExpr lin_2re(cxd a, const CxAffine& x) {
  return (x * (2.0 * std::conj(a))).real_expr();
}

// value of the eavesdropper rate cap at given certificate values
inline double eve_cap_rhs(double psi_s, double psi_j, double rho_s, double rho_n, double t) {
  return t * (rho_s * psi_s + psi_j + rho_n) - std::log(t) - 1.0 - std::log(psi_j + rho_n);
}

// secrecy objective in nats without the positive-part clamp, the quantity the
// block surrogates actually ascend
inline double unclamped_rate_nats(const Scenario& s, const ChannelSet& c, const Strategy& st) {
  double d = std::log1p(dest_sinr(s, c, st));
  double e = 0.0;
  for (const auto& ev : c.eves) e = std::max(e, std::log1p(exact_worst_eve_sinr(s, ev, st)));
  return d - e;
}

/**
 * phi >= log(rho_s psi_s + psi_j + rho_n) - log(psi_j + rho_n) for the
 * current tangent point t of the first logarithm (log x <= t x - log t - 1).
 * When psi_j carries no variables the whole cap is linear.
 */
inline void add_eve_rate_cap(conic::Problem& p, const std::string& label, int phi_var,
                             const conic::LinExpr& psi_s, const conic::LinExpr& psi_j,
                             double rho_s, double rho_n, double t) {
  conic::LinExpr total = psi_s * rho_s + psi_j;
  total.c0 += rho_n;
  conic::LinExpr lin = conic::LinExpr::variable(phi_var) - total * t;
  lin.c0 += std::log(t) + 1.0;
  conic::LinExpr u = psi_j;
  u.c0 += rho_n;
  if (u.terms.empty()) {
    conic::LinCon con;
    con.label = label;
    con.expr = lin;
    con.expr.c0 += std::log(u.c0);
    p.lincons.push_back(std::move(con));
  } else {
    conic::LogCon con;
    con.label = label;
    con.arg = u;
    con.lin = lin;
    p.logcons.push_back(std::move(con));
  }
}

struct BlockReport {
  bool ok = true;
  int solves = 0;
  std::string why;
};

inline std::string solve_failure_text(const std::string& stage, const conic::Result& res) {
  std::string out = stage + ": " + conic::to_string(res.status);
  if (!res.message.empty()) out += " (" + res.message + ")";
  out += " [t=" + std::to_string(res.final_t) + ", newton=" + std::to_string(res.newton_iters) +
         "]";
  return out;
}

/**
 * Covariance update with both phase vectors held fixed. The destination
 * objective keeps its first logarithm exact (the received power is affine in
 * the covariance) and relaxes the second through the tangent bound, refreshed
 * until the tangent points settle.
 */
inline BlockReport solve_jamming_block(const ScaledContext& cx, Strategy& st,
                                       const InnerOptions& opt, const std::string& tag) {
  BlockReport rep;
  const ChannelSet& c = cx.chan;
  const Scenario& s = cx.scen;
  if (c.m == 0 || !(s.jammer_power_w > 0.0)) return rep;
  const double rho_s = s.source_power_w, rho_n = s.noise_power_w;
  const int ne = (int)c.eves.size();

  cxd c_d = st.theta_a.dot(c.h_sad) + st.theta_r.dot(c.h_srd);
  double p_sd = rho_s * std::norm(c_d);
  Eigen::VectorXcd w_d = c.h_jd + c.h_jrd.adjoint() * st.theta_r;
  Eigen::MatrixXcd outer_r = theta_tilde_outer(st.theta_r);

  std::vector<double> psi_s(ne);
  std::vector<Eigen::VectorXcd> v(ne);
  for (int k = 0; k < ne; ++k) {
    psi_s[k] = worst_eve_signal_power(c.eves[k], st.theta_a, st.theta_r);
    v[k] = stack_jam_channels(c.eves[k].h_jk.est, c.eves[k].h_jrk.est);
  }

  auto tangents = [&](const Eigen::MatrixXcd& z, double& t_d, std::vector<double>& t_e) {
    t_d = 1.0 / (real_quad(z, w_d) + rho_n);
    for (int k = 0; k < ne; ++k) {
      double jk = worst_eve_jam_power(c.eves[k], st.theta_r, z);
      t_e[k] = 1.0 / (rho_s * psi_s[k] + jk + rho_n);
    }
  };

  // ascend the tangent surrogates from a given covariance; returns the end
  // point of the path or failure
  auto run_from = [&](Eigen::MatrixXcd zc, bool& ok) -> Eigen::MatrixXcd {
    ok = true;
    double t_d = 0.0;
    std::vector<double> t_e(ne);
    tangents(zc, t_d, t_e);

    for (int iter = 0; iter < opt.max_block_iters; ++iter) {
      conic::Problem p;
      HermVars zv = add_hermitian(p, c.m);
      add_psd(p, "covariance", zv.affine());
      {
        conic::LinCon budget;
        budget.label = "jamming power budget";
        budget.expr = conic::LinExpr::constant(s.jammer_power_w) - zv.trace_expr();
        p.lincons.push_back(std::move(budget));
      }
      int phi = p.add_var();
      std::vector<int> psi_j(ne);
      std::vector<JamBoundRefs> jrefs(ne);
      for (int k = 0; k < ne; ++k) {
        const auto& e = c.eves[k];
        psi_j[k] = p.add_var();
        HermAffine omega = jam_power_matrix(outer_r, zv.affine());
        jrefs[k] = add_worst_jam_lower_bound(p, "eve " + std::to_string(k) + " jamming floor",
                                             psi_j[k], omega, v[k], c.m, e.h_jk.radius,
                                             e.h_jrk.radius);
        add_eve_rate_cap(p, "eve " + std::to_string(k) + " rate cap", phi,
                         conic::LinExpr::constant(psi_s[k]), conic::LinExpr::variable(psi_j[k]),
                         rho_s, rho_n, t_e[k]);
      }
      conic::LinExpr j_d = zv.affine().quad_form(w_d);
      conic::LogTerm lt;
      lt.arg = j_d;
      lt.arg.c0 += p_sd + rho_n;
      p.obj_logs.push_back(std::move(lt));
      p.obj = j_d * (-t_d) - conic::LinExpr::variable(phi);
      p.obj_const = -t_d * rho_n + std::log(t_d) + 1.0;

      // interior warm start built from the incoming covariance; the diagonal
      // lift keeps the seed's condition number modest even when the incoming
      // point is an all-but-rank-one face of the cone
      Eigen::VectorXd y0 = Eigen::VectorXd::Zero(p.n);
      bool warm_ok = true;
      Eigen::MatrixXcd z_seed = 0.999 * zc;
      z_seed.diagonal().array() += 1e-4 * std::max(zc.trace().real() / c.m, 1e-12);
      zv.seed(y0, z_seed);
      double phi_need = 0.0;
      for (int k = 0; k < ne; ++k) {
        double jk = worst_eve_jam_power(c.eves[k], st.theta_r, z_seed);
        double ps = jk > 0.0 ? 0.99 * jk : -1e-3 * rho_n;
        Eigen::MatrixXcd omega_num = kron(outer_r.transpose(), z_seed);
        auto seed = jam_bound_multiplier_seed(omega_num, v[k], ps, c.m, c.eves[k].h_jk.radius,
                                              c.eves[k].h_jrk.radius);
        if (!seed.ok) {
          warm_ok = false;
          break;
        }
        y0(psi_j[k]) = ps;
        if (jrefs[k].eta_j >= 0) y0(jrefs[k].eta_j) = seed.eta_j;
        if (jrefs[k].eta_jr >= 0) y0(jrefs[k].eta_jr) = seed.eta_jr;
        phi_need = std::max(phi_need, eve_cap_rhs(psi_s[k], ps, rho_s, rho_n, t_e[k]));
      }
      y0(phi) = phi_need + 1e-3 * (1.0 + std::abs(phi_need));

      if (opt.inspect) opt.inspect(p, tag + "_jam_i" + std::to_string(iter));
      auto res = conic::solve(p, opt.conic, warm_ok ? &y0 : nullptr);
      ++rep.solves;
      if (res.status != conic::Status::kOptimal) {
        ok = false;
        rep.why = solve_failure_text("jamming block", res);
        return zc;
      }
      Eigen::MatrixXcd z_new = zv.value(res.y);
      double step = (z_new - zc).cwiseAbs().maxCoeff();
      zc = z_new;

      double t_d_new = 0.0;
      std::vector<double> t_e_new(ne);
      tangents(zc, t_d_new, t_e_new);
      double drift = std::abs(t_d_new - t_d) / t_d;
      for (int k = 0; k < ne; ++k)
        drift = std::max(drift, std::abs(t_e_new[k] - t_e[k]) / t_e[k]);
      t_d = t_d_new;
      t_e = t_e_new;
      double z_mag = zc.cwiseAbs().maxCoeff();
      if (drift < opt.t_tol || step < 1e-3 * std::max(z_mag, 1e-9 * s.jammer_power_w)) break;
    }
    return zc;
  };

  // The unclamped objective can hold two basins in the jamming power: near
  // silence when leakage into the destination outweighs the damage done to
  // the eavesdroppers, and high power when it does not. Ascend from the
  // incumbent and from a nearly silent covariance, keep the best end point;
  // the incumbent itself stays in the running so the block never regresses.
  bool ok_inc = true;
  Eigen::MatrixXcd z_inc = run_from(st.z, ok_inc);
  // quiet means below the destination noise floor, not a fixed fraction of
  // the budget, or the start already sits in the drowned region
  double alpha = std::min(1e-6 * s.jammer_power_w / c.m,
                          0.3 * rho_n / std::max(w_d.squaredNorm(), 1e-300));
  alpha = std::max(alpha, 1e-12 * s.jammer_power_w / c.m);
  Eigen::MatrixXcd z_quiet = alpha * Eigen::MatrixXcd::Identity(c.m, c.m);
  bool ok_quiet = false;
  bool try_quiet = opt.jam_quiet_start && (st.z - z_quiet).norm() > 1e-3 * s.jammer_power_w;
  if (try_quiet) z_quiet = run_from(z_quiet, ok_quiet);

  if (!ok_inc && !(try_quiet && ok_quiet)) {
    rep.ok = false;
    return rep;
  }
  rep.why.clear();
  Strategy cand = st;
  double best = unclamped_rate_nats(s, c, cand);
  if (ok_inc) {
    cand.z = z_inc;
    double r = unclamped_rate_nats(s, c, cand);
    if (r > best) {
      best = r;
      st.z = z_inc;
    }
  }
  if (try_quiet && ok_quiet) {
    cand.z = z_quiet;
    if (unclamped_rate_nats(s, c, cand) > best) st.z = z_quiet;
  }
  return rep;
}

/**
 * Aerial phase update. Jamming terms are constants here (the platform does
 * not sit in any jamming path), so only the destination signal linearization,
 * the per-eve signal caps and the unit-modulus penalty move between rounds.
 */
inline BlockReport solve_aris_block(const ScaledContext& cx, Strategy& st, const InnerOptions& opt,
                                    const std::string& tag) {
  BlockReport rep;
  const ChannelSet& c = cx.chan;
  const Scenario& s = cx.scen;
  if (c.na == 0) return rep;
  const double rho_s = s.source_power_w, rho_n = s.noise_power_w;
  const int ne = (int)c.eves.size();

  cxd c_r = st.theta_r.dot(c.h_srd);
  Eigen::VectorXcd w_d = c.h_jd + c.h_jrd.adjoint() * st.theta_r;
  double q_d = real_quad(st.z, w_d);
  std::vector<double> psi_j(ne);
  for (int k = 0; k < ne; ++k) psi_j[k] = worst_eve_jam_power(c.eves[k], st.theta_r, st.z);

  Eigen::VectorXcd theta0 = st.theta_a;
  double lambda = opt.penalty_init;

  for (int iter = 0; iter < opt.max_block_iters; ++iter) {
    cxd c0 = theta0.dot(c.h_sad) + c_r;
    std::vector<double> t_e(ne);
    for (int k = 0; k < ne; ++k) {
      double ps = worst_eve_signal_power(c.eves[k], theta0, st.theta_r);
      t_e[k] = 1.0 / (rho_s * ps + psi_j[k] + rho_n);
    }

    conic::Problem p;
    CxVecVars th = add_cx_vector(p, c.na);
    CxVec te = th.exprs();
    add_unit_modulus_cap(p, "aerial phase modulus", te);
    std::vector<int> iota(c.na);
    for (int i = 0; i < c.na; ++i) {
      iota[i] = p.add_var(0.0);
      conic::LinCon lower;
      lower.label = "aerial phase floor " + std::to_string(i);
      lower.expr = lin_2re(theta0(i), te[i]);
      lower.expr.c0 -= std::norm(theta0(i)) + 1.0;
      lower.expr.add(iota[i], 1.0);
      p.lincons.push_back(std::move(lower));
    }
    int phi = p.add_var();
    std::vector<int> psi_s(ne);
    std::vector<SignalBoundRefs> srefs(ne);
    for (int k = 0; k < ne; ++k) {
      const auto& e = c.eves[k];
      psi_s[k] = p.add_var();
      srefs[k] = add_worst_signal_upper_bound(
          p, "eve " + std::to_string(k) + " signal cap", psi_s[k], te, e.h_sak.est,
          e.h_sak.radius, cx_constant_vec(st.theta_r), e.h_srk.est, e.h_srk.radius);
      add_eve_rate_cap(p, "eve " + std::to_string(k) + " rate cap", phi,
                       conic::LinExpr::variable(psi_s[k]), conic::LinExpr::constant(psi_j[k]),
                       rho_s, rho_n, t_e[k]);
    }
    CxAffine c_expr = cx_dot(te, c.h_sad) + CxAffine::constant(c_r);
    conic::LinExpr sig = lin_2re(c0, c_expr);
    sig.c0 -= std::norm(c0);
    conic::LogTerm lt;
    lt.arg = sig * rho_s;
    lt.arg.c0 += q_d + rho_n;
    p.obj_logs.push_back(std::move(lt));
    p.obj = conic::LinExpr::variable(phi, -1.0);
    for (int i = 0; i < c.na; ++i) p.obj.add(iota[i], -lambda);
    p.obj_const = -std::log(q_d + rho_n);

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(p.n);
    Eigen::VectorXcd th_seed = 0.999 * theta0;
    th.seed(y0, th_seed);
    for (int i = 0; i < c.na; ++i)
      y0(iota[i]) = std::max(0.0, 1.0 - 0.998 * std::norm(theta0(i))) + 1e-6;
    double phi_need = 0.0;
    for (int k = 0; k < ne; ++k) {
      const auto& e = c.eves[k];
      double ps = worst_eve_signal_power(e, th_seed, st.theta_r) * (1.0 + 1e-3) + 1e-9;
      y0(psi_s[k]) = ps;
      auto [ra, rr] = signal_bound_multiplier_seed(th_seed, e.h_sak.est, e.h_sak.radius,
                                                   st.theta_r, e.h_srk.est, e.h_srk.radius);
      if (srefs[k].rho_a >= 0) y0(srefs[k].rho_a) = ra * (1.0 + 1e-3) + 1e-12;
      if (srefs[k].rho_r >= 0) y0(srefs[k].rho_r) = rr * (1.0 + 1e-3) + 1e-12;
      phi_need = std::max(phi_need, eve_cap_rhs(ps, psi_j[k], rho_s, rho_n, t_e[k]));
    }
    y0(phi) = phi_need + 1e-3 * (1.0 + std::abs(phi_need));

    if (opt.inspect) opt.inspect(p, tag + "_aris_i" + std::to_string(iter));
    auto res = conic::solve(p, opt.conic, &y0);
    ++rep.solves;
    if (res.status != conic::Status::kOptimal) {
      rep.ok = false;
      rep.why = solve_failure_text("aerial phase block", res);
      return rep;
    }
    Eigen::VectorXcd theta_new = th.value(res.y);
    st.theta_a = theta_new;
    double slack = 0.0;
    for (int i = 0; i < c.na; ++i) slack += res.y(iota[i]);
    double move = (theta_new - theta0).cwiseAbs().maxCoeff();
    theta0 = theta_new;
    if (move < opt.phase_tol && slack < opt.slack_tol) break;
    if (slack >= opt.slack_tol) lambda = std::min(2.0 * lambda, opt.penalty_max);
  }
  return rep;
}

/**
 * Fixed-RIS phase update, the one block where the variable sits in both the
 * signal and the jamming paths. The destination keeps a quadratic lower bound
 * on its received jamming inside the first logarithm and a Schur upper bound
 * through the tangent term; eavesdropper jamming floors use the affine
 * reflection surrogate, which is exact at the expansion point.
 */
inline BlockReport solve_fixed_block(const ScaledContext& cx, Strategy& st, const InnerOptions& opt,
                                     const std::string& tag) {
  BlockReport rep;
  const ChannelSet& c = cx.chan;
  const Scenario& s = cx.scen;
  if (c.nr == 0) return rep;
  const double rho_s = s.source_power_w, rho_n = s.noise_power_w;
  const int ne = (int)c.eves.size();

  cxd c_a = st.theta_a.dot(c.h_sad);
  Eigen::MatrixXcd zsq =
      c.m > 0 ? psd_sqrt(st.z, 1e-9 * (1.0 + std::abs(st.z.trace()))) : Eigen::MatrixXcd(0, 0);
  std::vector<Eigen::VectorXcd> v(ne);
  for (int k = 0; k < ne; ++k)
    v[k] = stack_jam_channels(c.eves[k].h_jk.est, c.eves[k].h_jrk.est);

  Eigen::VectorXcd theta0 = st.theta_r;
  double lambda = opt.penalty_init;

  for (int iter = 0; iter < opt.max_block_iters; ++iter) {
    cxd c0 = c_a + theta0.dot(c.h_srd);
    Eigen::VectorXcd w0 = c.h_jd + c.h_jrd.adjoint() * theta0;
    Eigen::VectorXcd zw0 = st.z * w0;
    double jd0 = real_quad(st.z, w0);
    double t_d = 1.0 / (jd0 + rho_n);
    Eigen::VectorXcd tt0(1 + c.nr);
    tt0(0) = 1.0;
    tt0.tail(c.nr) = theta0;
    std::vector<double> t_e(ne);
    for (int k = 0; k < ne; ++k) {
      double ps = worst_eve_signal_power(c.eves[k], st.theta_a, theta0);
      double pj = worst_eve_jam_power(c.eves[k], theta0, st.z);
      t_e[k] = 1.0 / (rho_s * ps + pj + rho_n);
    }

    conic::Problem p;
    CxVecVars th = add_cx_vector(p, c.nr);
    CxVec te = th.exprs();
    add_unit_modulus_cap(p, "fixed phase modulus", te);
    std::vector<int> iota(c.nr);
    for (int i = 0; i < c.nr; ++i) {
      iota[i] = p.add_var(0.0);
      conic::LinCon lower;
      lower.label = "fixed phase floor " + std::to_string(i);
      lower.expr = lin_2re(theta0(i), te[i]);
      lower.expr.c0 -= std::norm(theta0(i)) + 1.0;
      lower.expr.add(iota[i], 1.0);
      p.lincons.push_back(std::move(lower));
    }

    // destination jamming, bounded from both sides
    CxVec wt(c.m);
    for (int i = 0; i < c.m; ++i) {
      wt[i] = CxAffine::constant(c.h_jd(i));
      for (int j = 0; j < c.nr; ++j) wt[i] += te[j] * std::conj(c.h_jrd(j, i));
    }
    conic::LinExpr j_low;
    for (int i = 0; i < c.m; ++i) j_low += lin_2re(zw0(i), wt[i]);
    j_low.c0 -= jd0;
    int psi_jd = p.add_var();
    add_quad_upper_bound(p, "destination jamming cap", psi_jd, zsq, wt);

    int phi = p.add_var();
    std::vector<int> psi_s(ne), psi_j(ne);
    std::vector<SignalBoundRefs> srefs(ne);
    std::vector<JamBoundRefs> jrefs(ne);
    CxVec tt_expr(1 + c.nr);
    tt_expr[0] = CxAffine::constant(1.0);
    for (int j = 0; j < c.nr; ++j) tt_expr[1 + j] = te[j];
    HermAffine surr = reflection_outer_surrogate(tt_expr, tt0);
    for (int k = 0; k < ne; ++k) {
      const auto& e = c.eves[k];
      psi_s[k] = p.add_var();
      srefs[k] = add_worst_signal_upper_bound(
          p, "eve " + std::to_string(k) + " signal cap", psi_s[k],
          cx_constant_vec(st.theta_a), e.h_sak.est, e.h_sak.radius, te, e.h_srk.est,
          e.h_srk.radius);
      psi_j[k] = p.add_var();
      HermAffine xi = jam_power_matrix(surr, st.z);
      jrefs[k] = add_worst_jam_lower_bound(p, "eve " + std::to_string(k) + " jamming floor",
                                           psi_j[k], xi, v[k], c.m, e.h_jk.radius,
                                           e.h_jrk.radius);
      add_eve_rate_cap(p, "eve " + std::to_string(k) + " rate cap", phi,
                       conic::LinExpr::variable(psi_s[k]), conic::LinExpr::variable(psi_j[k]),
                       rho_s, rho_n, t_e[k]);
    }

    CxAffine c_expr = CxAffine::constant(c_a) + cx_dot(te, c.h_srd);
    conic::LinExpr sig = lin_2re(c0, c_expr);
    sig.c0 -= std::norm(c0);
    conic::LogTerm lt;
    lt.arg = sig * rho_s + j_low;
    lt.arg.c0 += rho_n;
    p.obj_logs.push_back(std::move(lt));
    p.obj = conic::LinExpr::variable(phi, -1.0) - conic::LinExpr::variable(psi_jd, t_d);
    for (int i = 0; i < c.nr; ++i) p.obj.add(iota[i], -lambda);
    p.obj_const = -t_d * rho_n + std::log(t_d) + 1.0;

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(p.n);
    bool warm_ok = true;
    Eigen::VectorXcd th_seed = 0.999 * theta0;
    th.seed(y0, th_seed);
    for (int i = 0; i < c.nr; ++i)
      y0(iota[i]) = std::max(0.0, 1.0 - 0.998 * std::norm(theta0(i))) + 1e-6;
    {
      Eigen::VectorXcd ws = c.h_jd + c.h_jrd.adjoint() * th_seed;
      y0(psi_jd) = real_quad(st.z, ws) * (1.0 + 1e-3) + 1e-9;
    }
    double phi_need = 0.0;
    for (int k = 0; k < ne; ++k) {
      const auto& e = c.eves[k];
      double ps = worst_eve_signal_power(e, st.theta_a, th_seed) * (1.0 + 1e-3) + 1e-9;
      y0(psi_s[k]) = ps;
      auto [ra, rr] = signal_bound_multiplier_seed(st.theta_a, e.h_sak.est, e.h_sak.radius,
                                                   th_seed, e.h_srk.est, e.h_srk.radius);
      if (srefs[k].rho_a >= 0) y0(srefs[k].rho_a) = ra * (1.0 + 1e-3) + 1e-12;
      if (srefs[k].rho_r >= 0) y0(srefs[k].rho_r) = rr * (1.0 + 1e-3) + 1e-12;

      Eigen::VectorXcd tts(1 + c.nr);
      tts(0) = 1.0;
      tts.tail(c.nr) = th_seed;
      Eigen::MatrixXcd psi_mat =
          tt0 * tts.adjoint() + tts * tt0.adjoint() - tt0 * tt0.adjoint();
      Eigen::MatrixXcd xi_num = kron(psi_mat.transpose(), st.z);
      double pj = worst_eve_jam_power(e, th_seed, st.z);
      double pj_seed = pj > 0.0 ? 0.9 * pj : -1e-3 * rho_n;
      auto seed =
          jam_bound_multiplier_seed(xi_num, v[k], pj_seed, c.m, e.h_jk.radius, e.h_jrk.radius);
      if (!seed.ok) {
        warm_ok = false;
      } else {
        y0(psi_j[k]) = pj_seed;
        if (jrefs[k].eta_j >= 0) y0(jrefs[k].eta_j) = seed.eta_j;
        if (jrefs[k].eta_jr >= 0) y0(jrefs[k].eta_jr) = seed.eta_jr;
      }
      phi_need = std::max(phi_need, eve_cap_rhs(y0(psi_s[k]), y0(psi_j[k]), rho_s, rho_n, t_e[k]));
    }
    y0(phi) = phi_need + 1e-3 * (1.0 + std::abs(phi_need));

    if (opt.inspect) opt.inspect(p, tag + "_fixed_i" + std::to_string(iter));
    auto res = conic::solve(p, opt.conic, warm_ok ? &y0 : nullptr);
    ++rep.solves;
    if (res.status != conic::Status::kOptimal) {
      rep.ok = false;
      rep.why = solve_failure_text("fixed phase block", res);
      return rep;
    }
    Eigen::VectorXcd theta_new = th.value(res.y);
    st.theta_r = theta_new;
    double slack = 0.0;
    for (int i = 0; i < c.nr; ++i) slack += res.y(iota[i]);
    double move = (theta_new - theta0).cwiseAbs().maxCoeff();
    theta0 = theta_new;
    if (move < opt.phase_tol && slack < opt.slack_tol) break;
    if (slack >= opt.slack_tol) lambda = std::min(2.0 * lambda, opt.penalty_max);
  }
  return rep;
}

}  // namespace detail

/**
 * Full coordinate descent for one placement. Sweeps covariance, aerial
 * phases, fixed phases; keeps the best strategy seen, measured by the exact
 * worst-case rate at the unit-modulus projection, so the reported trace is
 * nondecreasing and the returned certificate is attained by the returned
 * strategy. Solver failures during the first sweep trigger a randomized
 * restart; later failures skip the affected block and continue.
 */
inline InnerResult bcd_solve(const Scenario& s, const ChannelSet& c, const InnerOptions& opt = {},
                             const Strategy* warm = nullptr) {
  detail::ScaledContext cx = detail::make_scaled(s, c);
  auto rng = make_rng(s.rng_seed, kStreamInit);

  InnerResult out;
  double best_rate = -1.0;
  Strategy best;

  auto consider = [&](const Strategy& st) {
    Strategy proj = st;
    proj.theta_a = unit_modulus_projection(st.theta_a);
    proj.theta_r = unit_modulus_projection(st.theta_r);
    double r = exact_worst_secrecy_rate(cx.scen, cx.chan, proj);
    if (r > best_rate) {
      best_rate = r;
      best = proj;
    }
    return r;
  };

  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    Strategy st = warm != nullptr ? detail::to_scaled(cx, *warm)
                                  : uniform_strategy(cx.chan, cx.scen.jammer_power_w);
    if (attempt > 0) {
      std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
      for (int i = 0; i < st.theta_a.size(); ++i) st.theta_a(i) = std::polar(1.0, ang(rng));
      for (int i = 0; i < st.theta_r.size(); ++i) st.theta_r(i) = std::polar(1.0, ang(rng));
      out.restarts = attempt;
    }
    consider(st);

    bool first_sweep_failed = false;
    for (int outer = 1; outer <= opt.max_outer; ++outer) {
      Strategy prev = st;
      std::string tag = "o" + std::to_string(outer);
      for (auto block :
           {&detail::solve_jamming_block, &detail::solve_aris_block, &detail::solve_fixed_block}) {
        auto rep = block(cx, st, opt, tag);
        out.solver_calls += rep.solves;
        if (!rep.ok) {
          if (outer == 1) {
            first_sweep_failed = true;
            out.note = rep.why;
            break;
          }
          if (!out.note.empty()) out.note += "; ";
          out.note += "sweep " + std::to_string(outer) + ": " + rep.why + ", block skipped";
        }
      }
      if (first_sweep_failed) break;

      out.outer_iters = outer;
      consider(st);
      out.trace_bits.push_back(best_rate);

      double move = 0.0;
      if (st.theta_a.size() > 0)
        move = std::max(move, (st.theta_a - prev.theta_a).cwiseAbs().maxCoeff());
      if (st.theta_r.size() > 0)
        move = std::max(move, (st.theta_r - prev.theta_r).cwiseAbs().maxCoeff());
      if (st.z.size() > 0) move = std::max(move, (st.z - prev.z).cwiseAbs().maxCoeff());
      if (move < opt.outer_tol) {
        out.converged = true;
        break;
      }
    }
    if (!first_sweep_failed) break;
    if (attempt == opt.max_restarts) {
      out.note += "; restarts exhausted, returning best certified strategy";
    }
  }

  out.strategy = detail::from_scaled(cx, best);
  out.robust_rate_bits = exact_worst_secrecy_rate(s, c, out.strategy);
  out.dest_sinr = dest_sinr(s, c, out.strategy);
  out.worst_eve_sinr.resize(c.eves.size());
  for (size_t k = 0; k < c.eves.size(); ++k)
    out.worst_eve_sinr[k] = exact_worst_eve_sinr(s, c.eves[k], out.strategy);
  return out;
}

}  // namespace arisjam
