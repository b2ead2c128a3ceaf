#include "arisjam/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "arisjam/linalg.hpp"

using namespace arisjam;

TEST(Units, DbmRoundTrip) {
  EXPECT_NEAR(dbm_to_watt(30.0), 1.0, 1e-15);
  EXPECT_NEAR(dbm_to_watt(25.0), 0.31622776601683794, 1e-15);
  EXPECT_NEAR(dbm_to_watt(-110.0), 1e-14, 1e-26);
  EXPECT_NEAR(watt_to_dbm(dbm_to_watt(17.3)), 17.3, 1e-12);
  EXPECT_NEAR(db_to_linear(3.0), 1.9952623149688795, 1e-12);
  EXPECT_NEAR(db_to_linear(10.0), 10.0, 1e-12);
}

TEST(Scenario, DefaultConstants) {
  Scenario s = default_scenario(7);
  EXPECT_EQ(s.area_xmax - s.area_xmin, 400.0);
  EXPECT_EQ(s.area_ymax - s.area_ymin, 400.0);
  EXPECT_EQ(s.src_pos, Eigen::Vector3d(0, 0, 0));
  EXPECT_EQ(s.dst_pos, Eigen::Vector3d(350, 0, 0));
  EXPECT_EQ(s.fixed_ris_pos, Eigen::Vector3d(100, 150, 50));
  EXPECT_EQ(s.aris_altitude, 150.0);
  EXPECT_EQ(s.num_eves, 3);
  EXPECT_EQ(s.num_aris_elements, 50);
  EXPECT_EQ(s.num_ris_elements, 50);
  EXPECT_EQ(s.num_jammer_antennas, 4);
  EXPECT_NEAR(s.source_power_w, 1.0, 1e-15);
  EXPECT_NEAR(s.jammer_power_w, 0.31622776601683794, 1e-15);
  EXPECT_NEAR(s.noise_power_w, 1e-14, 1e-26);
  EXPECT_EQ(s.ple_fixed_ris, 2.6);
  EXPECT_EQ(s.ple_aris, 2.2);
  EXPECT_EQ(s.ple_air, 2.0);
  EXPECT_NEAR(s.rician_fixed_ris, db_to_linear(3.0), 1e-12);
  EXPECT_NEAR(s.rician_aris, 10.0, 1e-12);
  EXPECT_NEAR(s.ref_path_loss, 0.01, 1e-15);
  EXPECT_EQ(s.delta_csi, 0.01);
}

TEST(Scenario, EvePositionsInDiskAndDeterministic) {
  Scenario a = default_scenario(42);
  Scenario b = default_scenario(42);
  Scenario c = default_scenario(43);
  ASSERT_EQ(a.eve_positions.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(a.eve_positions[k], b.eve_positions[k]);
    double dx = a.eve_positions[k].x() - 300.0;
    double dy = a.eve_positions[k].y() - 300.0;
    EXPECT_LE(std::hypot(dx, dy), 50.0 + 1e-12);
    EXPECT_EQ(a.eve_positions[k].z(), 0.0);
  }
  bool any_differs = false;
  for (int k = 0; k < 3; ++k)
    if (a.eve_positions[k] != c.eve_positions[k]) any_differs = true;
  EXPECT_TRUE(any_differs);
}

TEST(Scenario, DeskVariant) {
  Scenario s = desk_scenario(3);
  EXPECT_EQ(s.num_aris_elements, 8);
  EXPECT_EQ(s.num_ris_elements, 8);
  EXPECT_EQ(s.num_jammer_antennas, 2);
  EXPECT_EQ(s.num_eves, 2);
  EXPECT_EQ(s.dst_pos, Eigen::Vector3d(350, 0, 0));  // same geometry as the full scenario
}

TEST(Scenario, SaveLoadRoundTrip) {
  Scenario s = default_scenario(11);
  s.delta_csi = 0.05;
  s.los_model = LosModel::kRandomPhase;
  s.jammer_power_w = dbm_to_watt(20.0);
  std::ostringstream os;
  save_scenario(s, os);
  std::istringstream is(os.str());
  Scenario r = load_scenario(is);
  EXPECT_EQ(r.area_xmax, s.area_xmax);
  EXPECT_EQ(r.src_pos, s.src_pos);
  EXPECT_EQ(r.dst_pos, s.dst_pos);
  EXPECT_EQ(r.fixed_ris_pos, s.fixed_ris_pos);
  EXPECT_EQ(r.num_eves, s.num_eves);
  ASSERT_EQ(r.eve_positions.size(), s.eve_positions.size());
  for (size_t k = 0; k < s.eve_positions.size(); ++k) EXPECT_EQ(r.eve_positions[k], s.eve_positions[k]);
  EXPECT_EQ(r.source_power_w, s.source_power_w);
  EXPECT_EQ(r.jammer_power_w, s.jammer_power_w);
  EXPECT_EQ(r.noise_power_w, s.noise_power_w);
  EXPECT_EQ(r.delta_csi, s.delta_csi);
  EXPECT_EQ(r.rng_seed, s.rng_seed);
  EXPECT_TRUE(r.los_model == LosModel::kRandomPhase);
}

TEST(Scenario, ValidationRejectsBadConfigs) {
  Scenario s = default_scenario(1);
  s.aris_altitude = 10.0;  // below the fixed RIS
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = default_scenario(1);
  s.noise_power_w = 0.0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = default_scenario(1);
  s.eve_positions.pop_back();
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = default_scenario(1);
  s.num_jammer_antennas = 0;
  EXPECT_THROW(validate(s), std::invalid_argument);
}

TEST(Scenario, ClampToArea) {
  Scenario s = default_scenario(1);
  Placement p = clamp_to_area(s, {-5.0, 900.0});
  EXPECT_EQ(p.x, 0.0);
  EXPECT_EQ(p.y, 400.0);
  Eigen::Vector3d a = aris_position(s, p);
  EXPECT_EQ(a.z(), 150.0);
}

TEST(Rng, DerivedStreamsDifferAndRepeat) {
  auto r1 = make_rng(9, kStreamChannels);
  auto r2 = make_rng(9, kStreamChannels);
  auto r3 = make_rng(9, kStreamPerturb);
  EXPECT_EQ(r1(), r2());
  EXPECT_NE(r1(), r3());
}

TEST(Rng, ComplexNormalMoments) {
  auto rng = make_rng(5);
  const int n = 20000;
  cxd mean = 0.0;
  double pow_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    cxd g = complex_normal(rng);
    mean += g;
    pow_sum += std::norm(g);
  }
  mean /= (double)n;
  EXPECT_NEAR(std::abs(mean), 0.0, 0.02);
  EXPECT_NEAR(pow_sum / n, 1.0, 0.03);
}

TEST(Rng, BallSamplesStayInsideAndFillRadius) {
  auto rng = make_rng(17);
  const int dim = 4;
  const double radius = 0.3;
  double max_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXcd d = uniform_complex_ball(dim, radius, rng);
    double ratio = d.norm() / radius;
    EXPECT_LE(ratio, 1.0 + 1e-12);
    max_ratio = std::max(max_ratio, ratio);
  }
  EXPECT_GT(max_ratio, 0.99);
}
