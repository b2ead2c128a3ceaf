#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "arisjam/channel.hpp"
#include "arisjam/linalg.hpp"
#include "arisjam/rng.hpp"
#include "arisjam/scenario.hpp"
#include "arisjam/units.hpp"

namespace arisjam {

// One complete transmit configuration: both phase vectors (unit modulus)
// and the jammer covariance.
struct Strategy {
  Eigen::VectorXcd theta_a;  // aerial RIS phases   (N_A)
  Eigen::VectorXcd theta_r;  // fixed RIS phases    (N_R)
  Eigen::MatrixXcd z;        // jammer covariance   (M x M, PSD)
};

inline void validate(const ChannelSet& c, const Strategy& st) {
  if (st.theta_a.size() != c.na || st.theta_r.size() != c.nr)
    throw std::invalid_argument("strategy: phase vector length mismatch");
  if (st.z.rows() != c.m || st.z.cols() != c.m)
    throw std::invalid_argument("strategy: covariance size mismatch");
}

inline Strategy uniform_strategy(const ChannelSet& c, double jammer_power_w) {
  Strategy st;
  st.theta_a = Eigen::VectorXcd::Ones(c.na);
  st.theta_r = Eigen::VectorXcd::Ones(c.nr);
  st.z = (c.m > 0 ? jammer_power_w / c.m : 0.0) * Eigen::MatrixXcd::Identity(c.m, c.m);
  return st;
}

namespace detail {

inline double real_quad(const Eigen::MatrixXcd& z, const Eigen::VectorXcd& g) {
  if (g.size() == 0) return 0.0;
  return std::real((g.adjoint() * z * g).value());
}

}  // namespace detail

// SINR at the eavesdropper for explicitly given channels (estimate, truth
// or a perturbed point, at the caller's choice)
inline double eve_sinr(const Scenario& s, const Strategy& st, const Eigen::VectorXcd& h_sak,
                       const Eigen::VectorXcd& h_srk, const Eigen::VectorXcd& h_jk,
                       const Eigen::MatrixXcd& h_jrk) {
  cxd c = st.theta_a.dot(h_sak) + st.theta_r.dot(h_srk);
  Eigen::VectorXcd g = h_jk + h_jrk.adjoint() * st.theta_r;
  return s.source_power_w * std::norm(c) / (detail::real_quad(st.z, g) + s.noise_power_w);
}

inline double dest_sinr(const Scenario& s, const ChannelSet& c, const Strategy& st) {
  cxd sig = st.theta_a.dot(c.h_sad) + st.theta_r.dot(c.h_srd);
  Eigen::VectorXcd g = c.h_jd + c.h_jrd.adjoint() * st.theta_r;
  return s.source_power_w * std::norm(sig) / (detail::real_quad(st.z, g) + s.noise_power_w);
}

enum class Csi { kEstimate, kTruth };

inline double eve_sinr(const Scenario& s, const ChannelSet::EveChannels& e, const Strategy& st,
                       Csi csi) {
  return csi == Csi::kTruth ? eve_sinr(s, st, e.h_sak.truth, e.h_srk.truth, e.h_jk.truth,
                                       e.h_jrk.truth)
                            : eve_sinr(s, st, e.h_sak.est, e.h_srk.est, e.h_jk.est, e.h_jrk.est);
}

inline double secrecy_rate_bits(double dest_sinr_lin, double worst_eve_sinr_lin) {
  double nats = std::log1p(dest_sinr_lin) - std::log1p(worst_eve_sinr_lin);
  return nats > 0.0 ? nats_to_bits(nats) : 0.0;
}

// secrecy rate against the strongest eavesdropper, by default on the true
// channels
inline double secrecy_rate_bits(const Scenario& s, const ChannelSet& c, const Strategy& st,
                                Csi csi = Csi::kTruth) {
  validate(c, st);
  double ge = 0.0;
  for (const auto& e : c.eves) ge = std::max(ge, eve_sinr(s, e, st, csi));
  return secrecy_rate_bits(dest_sinr(s, c, st), ge);
}

namespace detail {

// minimize (g0 + d)^H Z (g0 + d) over ||d|| <= r, exactly. Z must be PSD.
// Returns the attained value and the minimizing point w = g0 + d.
struct BallQuadMin {
  double value = 0.0;
  Eigen::VectorXcd w;
};

inline BallQuadMin min_quad_over_ball(const Eigen::MatrixXcd& z, const Eigen::VectorXcd& g0,
                                      double r) {
  BallQuadMin out;
  out.w = g0;
  if (g0.size() == 0) return out;
  if (r <= 0.0) {
    out.value = real_quad(z, g0);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(z);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Eigen::VectorXcd b = es.eigenvectors().adjoint() * g0;
  double lmax = lam.maxCoeff();
  double tol = std::max(1e-14, 1e-12 * lmax);

  // component of g0 in the range of Z; if it fits in the ball the quadratic
  // can be zeroed out exactly
  double range_sq = 0.0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > tol) range_sq += std::norm(b(i));
  if (range_sq <= r * r) {
    Eigen::VectorXcd wb = b;
    for (int i = 0; i < lam.size(); ++i)
      if (lam(i) > tol) wb(i) = 0.0;
    out.w = es.eigenvectors() * wb;
    out.value = 0.0;
    return out;
  }

  // KKT: (Z + mu I) w = mu g0, with ||w - g0|| = r on the boundary. The
  // residual ||(Z + mu I)^{-1} Z g0|| decreases monotonically in mu, so
  // bisection pins the multiplier.
  auto residual = [&](double mu) {
    double acc = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
      double t = lam(i) * std::abs(b(i)) / (lam(i) + mu);
      acc += t * t;
    }
    return std::sqrt(acc);
  };
  double lo = 0.0, hi = std::max(lmax * g0.norm() / r, 1e-30);
  while (residual(hi) > r) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (residual(mid) > r ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);

  Eigen::VectorXcd wb(b.size());
  double val = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    wb(i) = mu / (lam(i) + mu) * b(i);
    val += lam(i) * std::norm(wb(i));
  }
  out.w = es.eigenvectors() * wb;
  out.value = val;
  return out;
}

}  // namespace detail

// largest |theta_a^H h_sak + theta_r^H h_srk|^2 over the two signal error
// balls: phase-align both errors with the nominal combination
inline double worst_eve_signal_power(const ChannelSet::EveChannels& e,
                                     const Eigen::VectorXcd& theta_a,
                                     const Eigen::VectorXcd& theta_r) {
  double num = std::abs(theta_a.dot(e.h_sak.est) + theta_r.dot(e.h_srk.est)) +
               e.h_sak.radius * theta_a.norm() + e.h_srk.radius * theta_r.norm();
  return num * num;
}

// smallest received jamming power at the eavesdropper over its error balls;
// the direct and cascaded errors combine into one ball by Minkowski sum
inline double worst_eve_jam_power(const ChannelSet::EveChannels& e,
                                  const Eigen::VectorXcd& theta_r, const Eigen::MatrixXcd& z) {
  Eigen::VectorXcd g0 = e.h_jk.est + e.h_jrk.est.adjoint() * theta_r;
  double r = e.h_jk.radius + e.h_jrk.radius * theta_r.norm();
  return detail::min_quad_over_ball(z, g0, r).value;
}

// largest SINR eavesdropper k can reach over its uncertainty balls, in
// closed form; the signal and jamming terms decouple
inline double exact_worst_eve_sinr(const Scenario& s, const ChannelSet::EveChannels& e,
                                   const Strategy& st) {
  return s.source_power_w * worst_eve_signal_power(e, st.theta_a, st.theta_r) /
         (worst_eve_jam_power(e, st.theta_r, st.z) + s.noise_power_w);
}

inline double exact_worst_secrecy_rate(const Scenario& s, const ChannelSet& c, const Strategy& st) {
  validate(c, st);
  double ge = 0.0;
  for (const auto& e : c.eves) ge = std::max(ge, exact_worst_eve_sinr(s, e, st));
  return secrecy_rate_bits(dest_sinr(s, c, st), ge);
}

namespace detail {

// channel errors for one eavesdropper, each living in its own norm ball
struct EvePerturbation {
  Eigen::VectorXcd d_sa, d_sr, d_j;
  Eigen::MatrixXcd d_jr;
};

inline EvePerturbation zero_perturbation(const ChannelSet::EveChannels& e) {
  EvePerturbation p;
  p.d_sa = Eigen::VectorXcd::Zero(e.h_sak.est.size());
  p.d_sr = Eigen::VectorXcd::Zero(e.h_srk.est.size());
  p.d_j = Eigen::VectorXcd::Zero(e.h_jk.est.size());
  p.d_jr = Eigen::MatrixXcd::Zero(e.h_jrk.est.rows(), e.h_jrk.est.cols());
  return p;
}

inline double perturbed_eve_sinr(const Scenario& s, const ChannelSet::EveChannels& e,
                                 const Strategy& st, const EvePerturbation& p) {
  return eve_sinr(s, st, e.h_sak.est + p.d_sa, e.h_srk.est + p.d_sr, e.h_jk.est + p.d_j,
                  e.h_jrk.est + p.d_jr);
}

// Wirtinger gradients of the eavesdropper SINR with respect to each channel
// error (derivative in the conjugate variable, so these are steepest-ascent
// directions). Validated against finite differences in the test suite.
struct EveSinrGrads {
  double sinr = 0.0;
  EvePerturbation g;
};

inline EveSinrGrads eve_sinr_grads(const Scenario& s, const ChannelSet::EveChannels& e,
                                   const Strategy& st, const EvePerturbation& p) {
  cxd c = st.theta_a.dot(e.h_sak.est + p.d_sa) + st.theta_r.dot(e.h_srk.est + p.d_sr);
  Eigen::VectorXcd g = (e.h_jk.est + p.d_j) + (e.h_jrk.est + p.d_jr).adjoint() * st.theta_r;
  double den = real_quad(st.z, g) + s.noise_power_w;
  double num = s.source_power_w * std::norm(c);

  EveSinrGrads out;
  out.sinr = num / den;
  Eigen::VectorXcd zg = st.z * g;
  out.g.d_sa = (s.source_power_w / den * c) * st.theta_a;
  out.g.d_sr = (s.source_power_w / den * c) * st.theta_r;
  out.g.d_j = -(num / (den * den)) * zg;
  out.g.d_jr = -(num / (den * den)) * st.theta_r * zg.adjoint();
  return out;
}

inline void project_to_ball(Eigen::VectorXcd& v, double r) {
  double n = v.norm();
  if (n > r) v *= (n > 0.0 ? r / n : 0.0);
}

inline void project_to_ball(Eigen::MatrixXcd& v, double r) {
  double n = v.norm();
  if (n > r) v *= (n > 0.0 ? r / n : 0.0);
}

inline void project(EvePerturbation& p, const ChannelSet::EveChannels& e) {
  project_to_ball(p.d_sa, e.h_sak.radius);
  project_to_ball(p.d_sr, e.h_srk.radius);
  project_to_ball(p.d_j, e.h_jk.radius);
  project_to_ball(p.d_jr, e.h_jrk.radius);
}

// analytic candidate: phase-align the signal errors, split the exact
// denominator minimizer across the direct and cascaded balls
inline EvePerturbation analytic_candidate(const ChannelSet::EveChannels& e, const Strategy& st) {
  EvePerturbation p = zero_perturbation(e);
  cxd c = st.theta_a.dot(e.h_sak.est) + st.theta_r.dot(e.h_srk.est);
  cxd phase = std::abs(c) > 0.0 ? c / std::abs(c) : cxd(1.0, 0.0);
  if (st.theta_a.norm() > 0.0) p.d_sa = e.h_sak.radius * phase / st.theta_a.norm() * st.theta_a;
  if (st.theta_r.norm() > 0.0) p.d_sr = e.h_srk.radius * phase / st.theta_r.norm() * st.theta_r;
  return p;
}

inline void split_denominator_step(EvePerturbation& p, const ChannelSet::EveChannels& e,
                                   const Strategy& st, const Eigen::VectorXcd& delta) {
  double tn = st.theta_r.norm();
  double total = e.h_jk.radius + e.h_jrk.radius * tn;
  if (total <= 0.0) return;
  double alpha = e.h_jk.radius / total;
  p.d_j = alpha * delta;
  if (tn > 0.0) p.d_jr = st.theta_r * ((1.0 - alpha) * delta).adjoint() / (tn * tn);
}

}  // namespace detail

struct WorstCaseOptions {
  int samples = 2000;      // boundary draws per eavesdropper
  int refine_starts = 10;  // best samples kept for local refinement
  int pgd_steps = 200;
  double step_frac = 0.01;  // projected-gradient step, fraction of each radius
  std::uint64_t seed = 1;
};

struct WorstCaseResult {
  double rate_bits = 0.0;
  double dest_sinr = 0.0;
  std::vector<double> eve_sinr;  // per eve, largest found over its ball
  int worst_eve = -1;
};

/**
 * Searches the uncertainty balls for the channel realizations most favorable
 * to each eavesdropper: boundary sampling, an analytic candidate, then
 * projected gradient ascent from the best starts. The returned rate is an
 * upper bound on what the search can still find, so a robust design should
 * stay at or below it.
 */
inline WorstCaseResult worst_case_rate(const Scenario& s, const ChannelSet& c, const Strategy& st,
                                       const WorstCaseOptions& opt = {}) {
  validate(c, st);
  auto rng = make_rng(opt.seed, kStreamEval);

  WorstCaseResult res;
  res.dest_sinr = dest_sinr(s, c, st);
  res.eve_sinr.resize(c.eves.size(), 0.0);

  for (size_t k = 0; k < c.eves.size(); ++k) {
    const auto& e = c.eves[k];
    using Start = std::pair<double, detail::EvePerturbation>;
    std::vector<Start> starts;
    starts.reserve(opt.samples + 2);

    auto push = [&](detail::EvePerturbation p) {
      detail::project(p, e);
      starts.emplace_back(detail::perturbed_eve_sinr(s, e, st, p), std::move(p));
    };

    push(detail::zero_perturbation(e));
    {
      detail::EvePerturbation p = detail::analytic_candidate(e, st);
      Eigen::VectorXcd g0 = e.h_jk.est + e.h_jrk.est.adjoint() * st.theta_r;
      double r = e.h_jk.radius + e.h_jrk.radius * st.theta_r.norm();
      auto bq = detail::min_quad_over_ball(st.z, g0, r);
      detail::split_denominator_step(p, e, st, bq.w - g0);
      push(std::move(p));
    }
    for (int t = 0; t < opt.samples; ++t) {
      detail::EvePerturbation p;
      p.d_sa = uniform_complex_sphere((int)e.h_sak.est.size(), e.h_sak.radius, rng);
      p.d_sr = uniform_complex_sphere((int)e.h_srk.est.size(), e.h_srk.radius, rng);
      p.d_j = uniform_complex_sphere((int)e.h_jk.est.size(), e.h_jk.radius, rng);
      Eigen::VectorXcd flat =
          uniform_complex_sphere((int)e.h_jrk.est.size(), e.h_jrk.radius, rng);
      p.d_jr = Eigen::Map<const Eigen::MatrixXcd>(flat.data(), e.h_jrk.est.rows(),
                                                  e.h_jrk.est.cols());
      push(std::move(p));
    }

    int keep = std::min<int>(opt.refine_starts, (int)starts.size());
    std::partial_sort(starts.begin(), starts.begin() + keep, starts.end(),
                      [](const Start& a, const Start& b) { return a.first > b.first; });

    double best = 0.0;
    for (int i = 0; i < keep; ++i) {
      detail::EvePerturbation p = starts[i].second;
      double cur = starts[i].first;
      for (int it = 0; it < opt.pgd_steps; ++it) {
        auto gr = detail::eve_sinr_grads(s, e, st, p);
        auto step = [&](auto& d, const auto& g, double radius) {
          double n = g.norm();
          if (n > 0.0 && radius > 0.0) d += (opt.step_frac * radius / n) * g;
        };
        step(p.d_sa, gr.g.d_sa, e.h_sak.radius);
        step(p.d_sr, gr.g.d_sr, e.h_srk.radius);
        step(p.d_j, gr.g.d_j, e.h_jk.radius);
        step(p.d_jr, gr.g.d_jr, e.h_jrk.radius);
        detail::project(p, e);
        cur = detail::perturbed_eve_sinr(s, e, st, p);
      }
      best = std::max(best, cur);
    }
    res.eve_sinr[k] = best;
  }

  double ge = 0.0;
  for (size_t k = 0; k < res.eve_sinr.size(); ++k) {
    if (res.eve_sinr[k] >= ge) {
      ge = res.eve_sinr[k];
      res.worst_eve = (int)k;
    }
  }
  res.rate_bits = secrecy_rate_bits(res.dest_sinr, ge);
  return res;
}

}  // namespace arisjam
