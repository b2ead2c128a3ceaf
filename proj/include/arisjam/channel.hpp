#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "arisjam/rng.hpp"
#include "arisjam/scenario.hpp"

namespace arisjam {

// Direct per-hop channels. Everything downstream works on the cascaded
// forms; these exist for synthesis and for tests that recompute cascades.
struct RawChannels {
  Eigen::VectorXcd h_sa;  // source -> aerial RIS            (N_A)
  Eigen::VectorXcd h_ad;  // aerial RIS -> destination       (N_A)
  Eigen::VectorXcd h_sr;  // source -> fixed RIS             (N_R)
  Eigen::VectorXcd h_rd;  // fixed RIS -> destination        (N_R)
  Eigen::MatrixXcd h_jr;  // jammer -> fixed RIS             (N_R x M)
  Eigen::VectorXcd h_jd;  // jammer -> destination           (M)
  std::vector<Eigen::VectorXcd> h_ak;  // aerial RIS -> eve  (N_A each)
  std::vector<Eigen::VectorXcd> h_rk;  // fixed RIS -> eve   (N_R each)
  std::vector<Eigen::VectorXcd> h_jk;  // jammer -> eve      (M each)
};

struct UncertainVec {
  Eigen::VectorXcd est;
  Eigen::VectorXcd truth;
  double radius = 0.0;  // ||truth - est|| <= radius
};

struct UncertainMat {
  Eigen::MatrixXcd est;
  Eigen::MatrixXcd truth;
  double radius = 0.0;  // Frobenius-norm ball
};

/**
 * Cascaded channels for one placement. Legitimate-link channels are known
 * exactly; eavesdropper channels carry a norm-ball uncertainty around the
 * estimate. With radius 0, truth == est.
 */
struct ChannelSet {
  int na = 0, nr = 0, m = 0;

  Eigen::VectorXcd h_sad;  // source -> ARIS -> destination   (N_A)
  Eigen::VectorXcd h_srd;  // source -> fixed RIS -> dest     (N_R)
  Eigen::MatrixXcd h_jrd;  // jammer -> fixed RIS -> dest     (N_R x M)
  Eigen::VectorXcd h_jd;   // jammer -> destination           (M)

  struct EveChannels {
    UncertainVec h_sak;  // source -> ARIS -> eve             (N_A)
    UncertainVec h_srk;  // source -> fixed RIS -> eve        (N_R)
    UncertainMat h_jrk;  // jammer -> fixed RIS -> eve        (N_R x M)
    UncertainVec h_jk;   // jammer -> eve                     (M)
  };
  std::vector<EveChannels> eves;
};

namespace detail {

// half-wavelength ULA along the x axis, evaluated at the direction cosine
// toward the far node; unit-modulus entries, first element at phase zero
inline Eigen::VectorXcd ula_steering(int n, const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  Eigen::Vector3d d = to - from;
  double cosx = d.x() / d.norm();
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, M_PI * i * cosx);
  return a;
}

inline Eigen::VectorXcd random_phase_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, u(rng));
  return a;
}

struct LinkParams {
  double ple;
  double rician;
};

inline double path_loss(const Scenario& s, double dist, double ple) {
  if (dist <= 0.0) throw std::invalid_argument("channel synthesis: colocated nodes");
  return s.ref_path_loss * std::pow(dist, -ple);
}

// Rician vector channel between an array and a single-antenna node
inline Eigen::VectorXcd rician_vector(const Scenario& s, int n, const Eigen::Vector3d& array_pos,
                                      const Eigen::Vector3d& node_pos, LinkParams lp,
                                      std::mt19937_64& rng) {
  double pl = path_loss(s, (array_pos - node_pos).norm(), lp.ple);
  Eigen::VectorXcd los = (s.los_model == LosModel::kUla) ? ula_steering(n, array_pos, node_pos)
                                                         : random_phase_vec(n, rng);
  Eigen::VectorXcd nlos = complex_normal_vector(n, rng);
  double k = lp.rician;
  return std::sqrt(pl) * (std::sqrt(k / (1.0 + k)) * los + std::sqrt(1.0 / (1.0 + k)) * nlos);
}

// Rician matrix channel between two arrays (rows: rx array, cols: tx array)
inline Eigen::MatrixXcd rician_matrix(const Scenario& s, int rows, int cols,
                                      const Eigen::Vector3d& rx_pos, const Eigen::Vector3d& tx_pos,
                                      LinkParams lp, std::mt19937_64& rng) {
  double pl = path_loss(s, (rx_pos - tx_pos).norm(), lp.ple);
  Eigen::MatrixXcd los;
  if (s.los_model == LosModel::kUla) {
    Eigen::VectorXcd arx = ula_steering(rows, rx_pos, tx_pos);
    Eigen::VectorXcd atx = ula_steering(cols, tx_pos, rx_pos);
    los = arx * atx.transpose();
  } else {
    los.resize(rows, cols);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) los(r, c) = std::polar(1.0, u(rng));
  }
  Eigen::MatrixXcd nlos = complex_normal_matrix(rows, cols, rng);
  double k = lp.rician;
  return std::sqrt(pl) * (std::sqrt(k / (1.0 + k)) * los + std::sqrt(1.0 / (1.0 + k)) * nlos);
}

}  // namespace detail

/**
 * Draws all per-hop channels for one aerial placement. Pure function of
 * (scenario, placement, seed): the NLOS fading is seed-positional, so moving
 * the platform under the same seed changes only path loss and LOS geometry.
 */
inline RawChannels synthesize_raw(const Scenario& s, const Placement& p, std::uint64_t seed) {
  validate(s);
  auto rng = make_rng(seed, kStreamChannels);
  Eigen::Vector3d aris = aris_position(s, p);

  detail::LinkParams fixed{s.ple_fixed_ris, s.rician_fixed_ris};
  detail::LinkParams platform{s.ple_aris, s.rician_aris};
  detail::LinkParams air{s.ple_air, s.rician_aris};

  const int na = s.num_aris_elements, nr = s.num_ris_elements, m = s.num_jammer_antennas;
  RawChannels r;
  r.h_sa = detail::rician_vector(s, na, aris, s.src_pos, platform, rng);
  r.h_ad = detail::rician_vector(s, na, aris, s.dst_pos, platform, rng);
  r.h_sr = detail::rician_vector(s, nr, s.fixed_ris_pos, s.src_pos, fixed, rng);
  r.h_rd = detail::rician_vector(s, nr, s.fixed_ris_pos, s.dst_pos, fixed, rng);
  r.h_jr = detail::rician_matrix(s, nr, m, s.fixed_ris_pos, aris, air, rng);
  r.h_jd = detail::rician_vector(s, m, aris, s.dst_pos, platform, rng);
  r.h_ak.reserve(s.num_eves);
  r.h_rk.reserve(s.num_eves);
  r.h_jk.reserve(s.num_eves);
  for (int k = 0; k < s.num_eves; ++k) {
    r.h_ak.push_back(detail::rician_vector(s, na, aris, s.eve_positions[k], platform, rng));
    r.h_rk.push_back(detail::rician_vector(s, nr, s.fixed_ris_pos, s.eve_positions[k], fixed, rng));
    r.h_jk.push_back(detail::rician_vector(s, m, aris, s.eve_positions[k], platform, rng));
  }
  return r;
}

// diag(a^H) b, the reflected two-hop cascade
inline Eigen::VectorXcd cascade_vec(const Eigen::VectorXcd& ris_to_node,
                                    const Eigen::VectorXcd& src_to_ris) {
  return ris_to_node.conjugate().cwiseProduct(src_to_ris);
}

inline Eigen::MatrixXcd cascade_mat(const Eigen::VectorXcd& ris_to_node,
                                    const Eigen::MatrixXcd& tx_to_ris) {
  return ris_to_node.conjugate().asDiagonal() * tx_to_ris;
}

// cascades with exact CSI everywhere (radii zero, truth == estimate)
inline ChannelSet cascade(const RawChannels& r) {
  ChannelSet c;
  c.na = (int)r.h_sa.size();
  c.nr = (int)r.h_sr.size();
  c.m = (int)r.h_jd.size();
  c.h_sad = cascade_vec(r.h_ad, r.h_sa);
  c.h_srd = cascade_vec(r.h_rd, r.h_sr);
  c.h_jrd = cascade_mat(r.h_rd, r.h_jr);
  c.h_jd = r.h_jd;
  c.eves.resize(r.h_ak.size());
  for (size_t k = 0; k < r.h_ak.size(); ++k) {
    auto& e = c.eves[k];
    e.h_sak.est = e.h_sak.truth = cascade_vec(r.h_ak[k], r.h_sa);
    e.h_srk.est = e.h_srk.truth = cascade_vec(r.h_rk[k], r.h_sr);
    e.h_jrk.est = e.h_jrk.truth = cascade_mat(r.h_rk[k], r.h_jr);
    e.h_jk.est = e.h_jk.truth = r.h_jk[k];
  }
  return c;
}

/**
 * Applies bounded CSI errors to the eavesdropper channels: radius is
 * delta * ||estimate||, and the true channel is the estimate plus a draw
 * uniform in the error ball. Legitimate links stay exact.
 */
inline void perturb(ChannelSet& c, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("perturb: negative error fraction");
  auto rng = make_rng(seed, kStreamPerturb);
  auto bump_vec = [&](UncertainVec& u) {
    u.radius = delta * u.est.norm();
    u.truth = u.est;
    if (u.radius > 0.0 && u.est.size() > 0)
      u.truth += uniform_complex_ball((int)u.est.size(), u.radius, rng);
  };
  auto bump_mat = [&](UncertainMat& u) {
    u.radius = delta * u.est.norm();
    u.truth = u.est;
    if (u.radius > 0.0 && u.est.size() > 0) {
      Eigen::VectorXcd d = uniform_complex_ball((int)u.est.size(), u.radius, rng);
      u.truth += Eigen::Map<const Eigen::MatrixXcd>(d.data(), u.est.rows(), u.est.cols());
    }
  };
  for (auto& e : c.eves) {
    bump_vec(e.h_sak);
    bump_vec(e.h_srk);
    bump_mat(e.h_jrk);
    bump_vec(e.h_jk);
  }
}

// synthesis -> cascade -> CSI perturbation, the standard entry point
inline ChannelSet make_channels(const Scenario& s, const Placement& p, std::uint64_t seed) {
  ChannelSet c = cascade(synthesize_raw(s, p, seed));
  perturb(c, s.delta_csi, seed);
  return c;
}

// design-time view with no uncertainty: radii zeroed, estimates kept,
// truth preserved so evaluation still sees the real channels
inline ChannelSet with_zero_radii(ChannelSet c) {
  for (auto& e : c.eves) {
    e.h_sak.radius = 0.0;
    e.h_srk.radius = 0.0;
    e.h_jrk.radius = 0.0;
    e.h_jk.radius = 0.0;
  }
  return c;
}

}  // namespace arisjam
