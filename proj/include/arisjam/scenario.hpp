#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arisjam/rng.hpp"
#include "arisjam/units.hpp"

namespace arisjam {

// reserved rng sub-stream ids (see derive_seed)
enum : std::uint64_t {
  kStreamEves = 1,
  kStreamChannels = 2,
  kStreamPerturb = 3,
  kStreamInit = 4,
  kStreamEval = 5,
};

enum class LosModel { kUla, kRandomPhase };

struct Placement {
  double x = 0.0;
  double y = 0.0;
};

/**
 * Static description of one network instance: geometry, array sizes, powers
 * and propagation parameters. Powers are linear watts, distances meters,
 * Rician factors linear. Everything downstream is a pure function of
 * (scenario, aerial placement, seed).
 */
struct Scenario {
  double area_xmin = 0.0, area_xmax = 400.0;
  double area_ymin = 0.0, area_ymax = 400.0;

  Eigen::Vector3d src_pos{0.0, 0.0, 0.0};
  Eigen::Vector3d dst_pos{350.0, 0.0, 0.0};
  Eigen::Vector3d fixed_ris_pos{100.0, 150.0, 50.0};
  double aris_altitude = 150.0;

  int num_eves = 3;
  std::vector<Eigen::Vector3d> eve_positions;  // ground level, drawn at construction

  int num_aris_elements = 50;
  int num_ris_elements = 50;
  int num_jammer_antennas = 4;

  double source_power_w = dbm_to_watt(30.0);
  double jammer_power_w = dbm_to_watt(25.0);
  double noise_power_w = dbm_to_watt(-110.0);

  double ple_fixed_ris = 2.6;  // ground links of the fixed RIS
  double ple_aris = 2.2;       // links touching the aerial platform
  double ple_air = 2.0;        // jammer <-> fixed RIS
  double rician_fixed_ris = db_to_linear(3.0);
  double rician_aris = db_to_linear(10.0);
  double ref_path_loss = db_to_linear(-20.0);  // channel power gain at 1 m

  double delta_csi = 0.01;  // eavesdropper CSI error: radius = delta * ||estimate||
  LosModel los_model = LosModel::kUla;

  std::uint64_t rng_seed = 1;
};

inline void validate(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("scenario: " + msg); };
  if (!(s.area_xmax > s.area_xmin) || !(s.area_ymax > s.area_ymin)) fail("empty area");
  if (s.num_eves < 1) fail("need at least one eavesdropper");
  if ((int)s.eve_positions.size() != s.num_eves) fail("eve position count mismatch");
  if (s.num_aris_elements < 0 || s.num_ris_elements < 0) fail("negative element count");
  if (s.num_jammer_antennas < 1) fail("need at least one jammer antenna");
  if (!(s.source_power_w > 0.0) || !(s.jammer_power_w >= 0.0)) fail("non-positive power");
  if (!(s.noise_power_w > 0.0)) fail("non-positive noise power");
  if (!(s.fixed_ris_pos.z() > 0.0)) fail("fixed RIS must be above ground");
  if (!(s.aris_altitude > s.fixed_ris_pos.z())) fail("aerial platform must be above the fixed RIS");
  if (!(s.ple_fixed_ris > 0.0 && s.ple_aris > 0.0 && s.ple_air > 0.0)) fail("bad path loss exponent");
  if (!(s.rician_fixed_ris >= 0.0 && s.rician_aris >= 0.0)) fail("negative Rician factor");
  if (!(s.ref_path_loss > 0.0)) fail("non-positive reference path loss");
  if (s.delta_csi < 0.0) fail("negative CSI error fraction");
}

inline std::vector<Eigen::Vector3d> draw_eve_positions(int k, double cx, double cy, double radius,
                                                       std::uint64_t seed) {
  auto rng = make_rng(seed, kStreamEves);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Vector3d> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    double r = radius * std::sqrt(u(rng));
    double a = 2.0 * M_PI * u(rng);
    out.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a), 0.0);
  }
  return out;
}

inline Scenario default_scenario(std::uint64_t seed = 1) {
  Scenario s;
  s.rng_seed = seed;
  s.eve_positions = draw_eve_positions(s.num_eves, 300.0, 300.0, 50.0, seed);
  validate(s);
  return s;
}

// small instance with the same geometry, sized for fast solves
inline Scenario desk_scenario(std::uint64_t seed = 1) {
  Scenario s;
  s.rng_seed = seed;
  s.num_aris_elements = 8;
  s.num_ris_elements = 8;
  s.num_jammer_antennas = 2;
  s.num_eves = 2;
  s.eve_positions = draw_eve_positions(s.num_eves, 300.0, 300.0, 50.0, seed);
  validate(s);
  return s;
}

inline Placement clamp_to_area(const Scenario& s, Placement p) {
  p.x = std::min(std::max(p.x, s.area_xmin), s.area_xmax);
  p.y = std::min(std::max(p.y, s.area_ymin), s.area_ymax);
  return p;
}

inline Eigen::Vector3d aris_position(const Scenario& s, const Placement& p) {
  return {p.x, p.y, s.aris_altitude};
}

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/**
 * Writes the flat key/value config. Keys match the struct field names; a
 * comment documents each unit. Parse it back with load_scenario.
 */
inline void save_scenario(const Scenario& s, std::ostream& os) {
  using detail::fmt_double;
  os << "# network scenario (distances in meters, powers in watts,\n";
  os << "# path loss / Rician factors linear)\n";
  os << "area_xmin = " << fmt_double(s.area_xmin) << "\n";
  os << "area_xmax = " << fmt_double(s.area_xmax) << "\n";
  os << "area_ymin = " << fmt_double(s.area_ymin) << "\n";
  os << "area_ymax = " << fmt_double(s.area_ymax) << "\n";
  os << "src_pos = " << fmt_double(s.src_pos.x()) << "," << fmt_double(s.src_pos.y()) << ","
     << fmt_double(s.src_pos.z()) << "\n";
  os << "dst_pos = " << fmt_double(s.dst_pos.x()) << "," << fmt_double(s.dst_pos.y()) << ","
     << fmt_double(s.dst_pos.z()) << "\n";
  os << "fixed_ris_pos = " << fmt_double(s.fixed_ris_pos.x()) << "," << fmt_double(s.fixed_ris_pos.y())
     << "," << fmt_double(s.fixed_ris_pos.z()) << "\n";
  os << "aris_altitude = " << fmt_double(s.aris_altitude) << "\n";
  os << "num_eves = " << s.num_eves << "\n";
  os << "# x,y,z triples separated by spaces\n";
  os << "eve_positions =";
  for (const auto& e : s.eve_positions)
    os << " " << fmt_double(e.x()) << "," << fmt_double(e.y()) << "," << fmt_double(e.z());
  os << "\n";
  os << "num_aris_elements = " << s.num_aris_elements << "\n";
  os << "num_ris_elements = " << s.num_ris_elements << "\n";
  os << "num_jammer_antennas = " << s.num_jammer_antennas << "\n";
  os << "source_power_w = " << fmt_double(s.source_power_w) << "\n";
  os << "jammer_power_w = " << fmt_double(s.jammer_power_w) << "\n";
  os << "noise_power_w = " << fmt_double(s.noise_power_w) << "\n";
  os << "ple_fixed_ris = " << fmt_double(s.ple_fixed_ris) << "\n";
  os << "ple_aris = " << fmt_double(s.ple_aris) << "\n";
  os << "ple_air = " << fmt_double(s.ple_air) << "\n";
  os << "rician_fixed_ris = " << fmt_double(s.rician_fixed_ris) << "\n";
  os << "rician_aris = " << fmt_double(s.rician_aris) << "\n";
  os << "ref_path_loss = " << fmt_double(s.ref_path_loss) << "\n";
  os << "delta_csi = " << fmt_double(s.delta_csi) << "\n";
  os << "los_model = " << (s.los_model == LosModel::kUla ? "ula" : "random_phase") << "\n";
  os << "rng_seed = " << s.rng_seed << "\n";
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  save_scenario(s, f);
}

namespace detail {

inline Eigen::Vector3d parse_vec3(const std::string& txt) {
  Eigen::Vector3d v;
  char c1 = 0, c2 = 0;
  std::istringstream is(txt);
  if (!(is >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',')
    throw std::runtime_error("bad x,y,z triple: " + txt);
  return v;
}

}  // namespace detail

inline Scenario load_scenario(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string t) {
      auto b = t.find_first_not_of(" \t\r");
      auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }

  Scenario s;
  auto want = [&kv](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("scenario config missing key: " + key);
    return it->second;
  };
  auto getd = [&](const std::string& key) { return std::stod(want(key)); };
  auto geti = [&](const std::string& key) { return std::stoi(want(key)); };

  s.area_xmin = getd("area_xmin");
  s.area_xmax = getd("area_xmax");
  s.area_ymin = getd("area_ymin");
  s.area_ymax = getd("area_ymax");
  s.src_pos = detail::parse_vec3(want("src_pos"));
  s.dst_pos = detail::parse_vec3(want("dst_pos"));
  s.fixed_ris_pos = detail::parse_vec3(want("fixed_ris_pos"));
  s.aris_altitude = getd("aris_altitude");
  s.num_eves = geti("num_eves");
  {
    std::istringstream es(want("eve_positions"));
    std::string tok;
    s.eve_positions.clear();
    while (es >> tok) s.eve_positions.push_back(detail::parse_vec3(tok));
  }
  s.num_aris_elements = geti("num_aris_elements");
  s.num_ris_elements = geti("num_ris_elements");
  s.num_jammer_antennas = geti("num_jammer_antennas");
  s.source_power_w = getd("source_power_w");
  s.jammer_power_w = getd("jammer_power_w");
  s.noise_power_w = getd("noise_power_w");
  s.ple_fixed_ris = getd("ple_fixed_ris");
  s.ple_aris = getd("ple_aris");
  s.ple_air = getd("ple_air");
  s.rician_fixed_ris = getd("rician_fixed_ris");
  s.rician_aris = getd("rician_aris");
  s.ref_path_loss = getd("ref_path_loss");
  s.delta_csi = getd("delta_csi");
  {
    std::string m = want("los_model");
    if (m == "ula")
      s.los_model = LosModel::kUla;
    else if (m == "random_phase")
      s.los_model = LosModel::kRandomPhase;
    else
      throw std::runtime_error("unknown los_model: " + m);
  }
  s.rng_seed = std::stoull(want("rng_seed"));
  validate(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario config: " + path);
  return load_scenario(f);
}

}  // namespace arisjam
