#include "arisjam/lmi.hpp"

#include <gtest/gtest.h>

#include "arisjam/eval.hpp"
#include "arisjam/rng.hpp"

namespace arisjam {
namespace {

Eigen::VectorXcd random_phases(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, u(rng));
  return v;
}

Eigen::MatrixXcd random_psd(int m, std::mt19937_64& rng) {
  Eigen::MatrixXcd a = complex_normal_matrix(m, m, rng);
  return a * a.adjoint();
}

TEST(Lmi, SignalBoundLossless) {
  // with fixed phases the minimal certified bound must match the closed form
  for (int trial = 0; trial < 10; ++trial) {
    auto rng = make_rng(100 + trial, 0);
    int na = 2, nr = 3;
    Eigen::VectorXcd ta = random_phases(na, rng), tr = random_phases(nr, rng);
    Eigen::VectorXcd ha = complex_normal_vector(na, rng), hr = complex_normal_vector(nr, rng);
    double ra = 0.1 + 0.05 * trial, rr = 0.3;

    conic::Problem p;
    int psi = p.add_var();
    add_worst_signal_upper_bound(p, "sig", psi, cx_constant_vec(ta), ha, ra, cx_constant_vec(tr),
                                 hr, rr);
    p.obj = conic::LinExpr::variable(psi, -1.0);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;

    double reach = std::abs(ta.dot(ha) + tr.dot(hr)) + ra * ta.norm() + rr * tr.norm();
    EXPECT_NEAR(res.y(psi), reach * reach, 1e-6 * (1.0 + reach * reach));

    // soundness: no sampled error may exceed the certificate
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
      Eigen::VectorXcd da = uniform_complex_ball(na, ra, rng);
      Eigen::VectorXcd dr = uniform_complex_ball(nr, rr, rng);
      worst = std::max(worst, std::norm(ta.dot(ha + da) + tr.dot(hr + dr)));
    }
    EXPECT_LE(worst, res.y(psi) * (1.0 + 1e-7));
  }
}

TEST(Lmi, SignalBoundDroppedGroups) {
  auto rng = make_rng(7, 0);
  int na = 2, nr = 2;
  Eigen::VectorXcd ta = random_phases(na, rng), tr = random_phases(nr, rng);
  Eigen::VectorXcd ha = complex_normal_vector(na, rng), hr = complex_normal_vector(nr, rng);
  double cabs = std::abs(ta.dot(ha) + tr.dot(hr));

  {
    // both radii zero: plain Schur form, psi* = |c|^2
    conic::Problem p;
    int psi = p.add_var();
    auto refs = add_worst_signal_upper_bound(p, "sig", psi, cx_constant_vec(ta), ha, 0.0,
                                             cx_constant_vec(tr), hr, 0.0);
    EXPECT_EQ(refs.rho_a, -1);
    EXPECT_EQ(refs.rho_r, -1);
    EXPECT_EQ(p.blocks[0].dim, 4);  // realified 2x2
    p.obj = conic::LinExpr::variable(psi, -1.0);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    EXPECT_NEAR(res.y(psi), cabs * cabs, 1e-7 * (1.0 + cabs * cabs));
  }
  {
    // one-sided uncertainty
    conic::Problem p;
    int psi = p.add_var();
    double rr = 0.2;
    auto refs = add_worst_signal_upper_bound(p, "sig", psi, cx_constant_vec(ta), ha, 0.0,
                                             cx_constant_vec(tr), hr, rr);
    EXPECT_EQ(refs.rho_a, -1);
    EXPECT_GE(refs.rho_r, 0);
    p.obj = conic::LinExpr::variable(psi, -1.0);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    double reach = cabs + rr * tr.norm();
    EXPECT_NEAR(res.y(psi), reach * reach, 1e-6 * (1.0 + reach * reach));
  }
  {
    // a tiny radius must agree with the zero-radius collapse
    conic::Problem p;
    int psi = p.add_var();
    add_worst_signal_upper_bound(p, "sig", psi, cx_constant_vec(ta), ha, 1e-10,
                                 cx_constant_vec(tr), hr, 1e-10);
    p.obj = conic::LinExpr::variable(psi, -1.0);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    EXPECT_NEAR(res.y(psi), cabs * cabs, 1e-6 * (1.0 + cabs * cabs));
  }
}

TEST(Lmi, StackedJamChannelsMatchKronecker) {
  // the stacking convention must reproduce the received jamming power
  auto rng = make_rng(21, 0);
  int m = 2, nr = 3;
  Eigen::VectorXcd tr = random_phases(nr, rng);
  Eigen::VectorXcd hj = complex_normal_vector(m, rng);
  Eigen::MatrixXcd hjr = complex_normal_matrix(nr, m, rng);
  Eigen::MatrixXcd z = random_psd(m, rng);

  Eigen::VectorXcd w = hj + hjr.adjoint() * tr;
  double direct = std::real((w.adjoint() * z * w).value());

  Eigen::VectorXcd v = stack_jam_channels(hj, hjr);
  Eigen::MatrixXcd omega = kron(theta_tilde_outer(tr).transpose(), z);
  double via_kron = std::real((v.adjoint() * omega * v).value());
  EXPECT_NEAR(via_kron, direct, 1e-12 * std::abs(direct));
}

TEST(Lmi, JamBoundTightAndSound) {
  for (int trial = 0; trial < 6; ++trial) {
    auto rng = make_rng(300 + trial, 0);
    int m = 2, nr = 2;
    Eigen::VectorXcd tr = random_phases(nr, rng);
    Eigen::VectorXcd hj = complex_normal_vector(m, rng);
    Eigen::MatrixXcd hjr = complex_normal_matrix(nr, m, rng);
    Eigen::MatrixXcd z = random_psd(m, rng);
    double rj = 0.05 + 0.03 * trial, rjr = 0.1;

    Eigen::VectorXcd v = stack_jam_channels(hj, hjr);
    HermAffine zc(m);
    zc.add_const(z);
    HermAffine omega = jam_power_matrix(theta_tilde_outer(tr), zc);

    conic::Problem p;
    int psi = p.add_var();
    auto refs = add_worst_jam_lower_bound(p, "jam", psi, omega, v, m, rj, rjr);
    ASSERT_GE(refs.eta_j, 0);
    ASSERT_GE(refs.eta_jr, 0);
    p.obj = conic::LinExpr::variable(psi);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;

    ChannelSet::EveChannels e;
    e.h_jk.est = hj;
    e.h_jk.radius = rj;
    e.h_jrk.est = hjr;
    e.h_jrk.radius = rjr;
    double exact = worst_eve_jam_power(e, tr, z);
    EXPECT_LE(res.y(psi), exact * (1.0 + 1e-9) + 1e-12);  // never overclaims
    EXPECT_NEAR(res.y(psi), exact, 1e-5 * (1.0 + exact));  // and loses nothing here

    // sampled channels in the balls always deliver at least the certificate
    double least = conic::kInf;
    Eigen::MatrixXcd omega_num = kron(theta_tilde_outer(tr).transpose(), z);
    for (int t = 0; t < 2000; ++t) {
      Eigen::VectorXcd d(v.size());
      d.head(m) = uniform_complex_ball(m, rj, rng);
      d.tail(v.size() - m) = uniform_complex_ball((int)v.size() - m, rjr, rng);
      Eigen::VectorXcd vd = v + d;
      least = std::min(least, std::real((vd.adjoint() * omega_num * vd).value()));
    }
    EXPECT_GE(least, res.y(psi) * (1.0 - 1e-7) - 1e-12);

    // the multiplier seed must make the block strictly PSD below the optimum
    auto seed = jam_bound_multiplier_seed(omega_num, v, 0.9 * exact, m, rj, rjr);
    ASSERT_TRUE(seed.ok);
    Eigen::VectorXd y = res.y;
    y(psi) = 0.9 * exact;
    y(refs.eta_j) = seed.eta_j;
    y(refs.eta_jr) = seed.eta_jr;
    auto feas = conic::detail::check_strict(p, y, 0.0);
    EXPECT_TRUE(feas.ok) << feas.worst_label;
  }
}

TEST(Lmi, JamBoundCollapse) {
  auto rng = make_rng(31, 0);
  int m = 2, nr = 2;
  Eigen::VectorXcd tr = random_phases(nr, rng);
  Eigen::VectorXcd hj = complex_normal_vector(m, rng);
  Eigen::MatrixXcd hjr = complex_normal_matrix(nr, m, rng);
  Eigen::MatrixXcd z = random_psd(m, rng);
  Eigen::VectorXcd v = stack_jam_channels(hj, hjr);
  HermAffine zc(m);
  zc.add_const(z);
  HermAffine omega = jam_power_matrix(theta_tilde_outer(tr), zc);
  double q = std::real((v.adjoint() * omega.eval(Eigen::VectorXd()) * v).value());

  double psi_zero;
  {
    // no uncertainty: the bound is a single linear inequality
    conic::Problem p;
    int psi = p.add_var();
    auto refs = add_worst_jam_lower_bound(p, "jam", psi, omega, v, m, 0.0, 0.0);
    EXPECT_EQ(refs.eta_j, -1);
    EXPECT_EQ(refs.eta_jr, -1);
    EXPECT_TRUE(p.blocks.empty());
    ASSERT_EQ(p.lincons.size(), 1u);
    p.obj = conic::LinExpr::variable(psi);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    psi_zero = res.y(psi);
    EXPECT_NEAR(psi_zero, q, 1e-7 * (1.0 + q));
  }
  {
    // small radii stay lossless and approach the collapsed answer; the
    // multipliers scale like 1/radius^2, so this is also a conditioning probe
    double r = 1e-5;
    conic::Problem p;
    int psi = p.add_var();
    add_worst_jam_lower_bound(p, "jam", psi, omega, v, m, r, r);
    p.obj = conic::LinExpr::variable(psi);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    ChannelSet::EveChannels e;
    e.h_jk.est = hj;
    e.h_jk.radius = r;
    e.h_jrk.est = hjr;
    e.h_jrk.radius = r;
    double exact = worst_eve_jam_power(e, tr, z);
    EXPECT_NEAR(res.y(psi), exact, 1e-5 * (1.0 + exact));
    EXPECT_NEAR(res.y(psi), psi_zero, 1e-3 * (1.0 + q));
  }
  {
    // one exact group: block shrinks to the uncertain coordinates
    conic::Problem p;
    int psi = p.add_var();
    auto refs = add_worst_jam_lower_bound(p, "jam", psi, omega, v, m, 0.0, 0.2);
    EXPECT_EQ(refs.eta_j, -1);
    ASSERT_GE(refs.eta_jr, 0);
    ASSERT_EQ(p.blocks.size(), 1u);
    EXPECT_EQ(p.blocks[0].dim, 2 * ((int)v.size() - m + 1));
    p.obj = conic::LinExpr::variable(psi);
    auto res = conic::solve(p);
    ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
    ChannelSet::EveChannels e;
    e.h_jk.est = hj;
    e.h_jk.radius = 0.0;
    e.h_jrk.est = hjr;
    e.h_jrk.radius = 0.2;
    double exact = worst_eve_jam_power(e, tr, z);
    EXPECT_NEAR(res.y(psi), exact, 1e-5 * (1.0 + exact));
  }
}

TEST(Lmi, ReflectionSurrogate) {
  auto rng = make_rng(41, 0);
  int nr = 3;
  Eigen::VectorXcd tr0 = random_phases(nr, rng);
  Eigen::VectorXcd tt0(nr + 1);
  tt0(0) = 1.0;
  tt0.tail(nr) = tr0;

  // expansion point: surrogate equals the true outer product
  HermAffine sur = reflection_outer_surrogate(cx_constant_vec(tt0), tt0);
  Eigen::MatrixXcd at0 = sur.eval(Eigen::VectorXd());
  EXPECT_LT((at0 - tt0 * tt0.adjoint()).norm(), 1e-12);

  // any other point: dominated by the true outer product
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXcd tt(nr + 1);
    tt(0) = 1.0;
    tt.tail(nr) = random_phases(nr, rng);
    HermAffine s2 = reflection_outer_surrogate(cx_constant_vec(tt), tt0);
    Eigen::MatrixXcd diff = tt * tt.adjoint() - s2.eval(Eigen::VectorXd());
    EXPECT_GE(min_eigenvalue(diff), -1e-12);
  }

  // consequence: jamming power from the surrogate never exceeds the truth
  int m = 2;
  Eigen::MatrixXcd z = random_psd(m, rng);
  Eigen::VectorXcd hj = complex_normal_vector(m, rng);
  Eigen::MatrixXcd hjr = complex_normal_matrix(nr, m, rng);
  Eigen::VectorXcd v = stack_jam_channels(hj, hjr);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXcd trx = random_phases(nr, rng);
    Eigen::VectorXcd tt(nr + 1);
    tt(0) = 1.0;
    tt.tail(nr) = trx;
    HermAffine xi = jam_power_matrix(reflection_outer_surrogate(cx_constant_vec(tt), tt0), z);
    double sur_power = xi.quad_form(v).eval(Eigen::VectorXd());
    Eigen::VectorXcd w = hj + hjr.adjoint() * trx;
    double true_power = std::real((w.adjoint() * z * w).value());
    EXPECT_LE(sur_power, true_power + 1e-10 * (1.0 + std::abs(true_power)));
  }
}

TEST(Lmi, QuadUpperBound) {
  auto rng = make_rng(51, 0);
  int m = 3;
  Eigen::MatrixXcd z = random_psd(m, rng);
  Eigen::MatrixXcd zs = psd_sqrt(z);
  EXPECT_LT((zs * zs - z).norm(), 1e-10 * z.norm());
  EXPECT_THROW(psd_sqrt(-Eigen::MatrixXcd::Identity(2, 2)), std::invalid_argument);

  Eigen::VectorXcd w = complex_normal_vector(m, rng);
  conic::Problem p;
  int psi = p.add_var();
  add_quad_upper_bound(p, "qd", psi, zs, cx_constant_vec(w));
  p.obj = conic::LinExpr::variable(psi, -1.0);
  auto res = conic::solve(p);
  ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
  double truth = std::real((w.adjoint() * z * w).value());
  EXPECT_NEAR(res.y(psi), truth, 1e-7 * (1.0 + truth));
}

TEST(Lmi, UnitModulusCap) {
  conic::Problem p;
  CxVecVars th = add_cx_vector(p, 2);
  add_unit_modulus_cap(p, "mod", th.exprs());
  // push one element along +1 and the other along +i
  p.obj = conic::LinExpr::variable(th.base + 0) + conic::LinExpr::variable(th.base + 3);
  auto res = conic::solve(p);
  ASSERT_EQ(res.status, conic::Status::kOptimal) << res.message;
  Eigen::VectorXcd v = th.value(res.y);
  EXPECT_NEAR(v(0).real(), 1.0, 1e-6);
  EXPECT_NEAR(v(1).imag(), 1.0, 1e-6);
  EXPECT_LE(std::abs(v(0)), 1.0 + 1e-9);
  EXPECT_LE(std::abs(v(1)), 1.0 + 1e-9);
}

}  // namespace
}  // namespace arisjam
