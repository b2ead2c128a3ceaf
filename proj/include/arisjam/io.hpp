#pragma once

/**
 * Serialization for the solver pipeline: structured channel dumps, strategy
 * and solution files, worst-case reports, and a sparse text dump of assembled
 * conic programs. JSON complex entries are [re, im] pairs so the files stay
 * language neutral; matrices are arrays of rows.
 */

#include <Eigen/Dense>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "conic.hpp"
#include "eval.hpp"
#include "inner.hpp"
#include "scenario.hpp"

namespace arisjam {

inline nlohmann::json cvec_json(const Eigen::VectorXcd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

inline Eigen::VectorXcd cvec_from_json(const nlohmann::json& a) {
  if (!a.is_array()) throw std::runtime_error("complex vector: expected an array");
  Eigen::VectorXcd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a[i];
    if (!p.is_array() || p.size() != 2) throw std::runtime_error("complex entry: expected [re, im]");
    v(static_cast<Eigen::Index>(i)) = cxd(p[0].get<double>(), p[1].get<double>());
  }
  return v;
}

inline nlohmann::json cmat_json(const Eigen::MatrixXcd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXcd cmat_from_json(const nlohmann::json& rows) {
  if (!rows.is_array()) throw std::runtime_error("complex matrix: expected an array of rows");
  Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXcd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const auto& row = rows[i];
    if (static_cast<Eigen::Index>(row.size()) != nc) throw std::runtime_error("ragged complex matrix");
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& p = row[j];
      if (!p.is_array() || p.size() != 2) throw std::runtime_error("complex entry: expected [re, im]");
      m(i, j) = cxd(p[0].get<double>(), p[1].get<double>());
    }
  }
  return m;
}

inline nlohmann::json uncertain_json(const UncertainVec& u) {
  return {{"est", cvec_json(u.est)}, {"truth", cvec_json(u.truth)}, {"radius", u.radius}};
}

inline nlohmann::json uncertain_json(const UncertainMat& u) {
  return {{"est", cmat_json(u.est)}, {"truth", cmat_json(u.truth)}, {"radius", u.radius}};
}

inline UncertainVec uncertain_vec_from_json(const nlohmann::json& j) {
  UncertainVec u;
  u.est = cvec_from_json(j.at("est"));
  u.truth = cvec_from_json(j.at("truth"));
  u.radius = j.at("radius").get<double>();
  return u;
}

inline UncertainMat uncertain_mat_from_json(const nlohmann::json& j) {
  UncertainMat u;
  u.est = cmat_from_json(j.at("est"));
  u.truth = cmat_from_json(j.at("truth"));
  u.radius = j.at("radius").get<double>();
  return u;
}

inline nlohmann::json channels_json(const ChannelSet& c) {
  nlohmann::json eves = nlohmann::json::array();
  for (const auto& e : c.eves) {
    eves.push_back({{"h_sak", uncertain_json(e.h_sak)},
                    {"h_srk", uncertain_json(e.h_srk)},
                    {"h_jrk", uncertain_json(e.h_jrk)},
                    {"h_jk", uncertain_json(e.h_jk)}});
  }
  return {{"na", c.na},         {"nr", c.nr},
          {"m", c.m},           {"h_sad", cvec_json(c.h_sad)},
          {"h_srd", cvec_json(c.h_srd)}, {"h_jrd", cmat_json(c.h_jrd)},
          {"h_jd", cvec_json(c.h_jd)},   {"eves", std::move(eves)}};
}

inline ChannelSet channels_from_json(const nlohmann::json& j) {
  ChannelSet c;
  c.na = j.at("na").get<int>();
  c.nr = j.at("nr").get<int>();
  c.m = j.at("m").get<int>();
  c.h_sad = cvec_from_json(j.at("h_sad"));
  c.h_srd = cvec_from_json(j.at("h_srd"));
  c.h_jrd = cmat_from_json(j.at("h_jrd"));
  c.h_jd = cvec_from_json(j.at("h_jd"));
  for (const auto& e : j.at("eves")) {
    ChannelSet::EveChannels ec;
    ec.h_sak = uncertain_vec_from_json(e.at("h_sak"));
    ec.h_srk = uncertain_vec_from_json(e.at("h_srk"));
    ec.h_jrk = uncertain_mat_from_json(e.at("h_jrk"));
    ec.h_jk = uncertain_vec_from_json(e.at("h_jk"));
    c.eves.push_back(std::move(ec));
  }
  return c;
}

inline nlohmann::json strategy_json(const Strategy& st) {
  return {{"theta_a", cvec_json(st.theta_a)},
          {"theta_r", cvec_json(st.theta_r)},
          {"z", cmat_json(st.z)}};
}

inline Strategy strategy_from_json(const nlohmann::json& j) {
  Strategy st;
  st.theta_a = cvec_from_json(j.at("theta_a"));
  st.theta_r = cvec_from_json(j.at("theta_r"));
  st.z = cmat_from_json(j.at("z"));
  return st;
}

inline std::string scenario_config_string(const Scenario& s) {
  std::ostringstream os;
  save_scenario(s, os);
  return os.str();
}

inline Scenario scenario_from_config_string(const std::string& cfg) {
  std::istringstream is(cfg);
  return load_scenario(is);
}

/**
 * Everything needed to reproduce and re-evaluate one inner solve. The
 * scenario rides along as its own config text, so the channels can be
 * regenerated bit for bit from (scenario, placement).
 */
struct SolutionFile {
  Scenario scenario;
  Placement placement{0.0, 0.0};
  std::uint64_t seed = 1;
  Strategy strategy;
  double robust_rate_bits = 0.0;
  double dest_sinr = 0.0;
  std::vector<double> worst_eve_sinr;
  std::vector<double> trace_bits;
  int outer_iters = 0;
  int solver_calls = 0;
  int restarts = 0;
  bool converged = false;
  std::string note;
};

inline nlohmann::json solution_json(const SolutionFile& f) {
  return {{"scenario_config", scenario_config_string(f.scenario)},
          {"placement", {f.placement.x, f.placement.y}},
          {"seed", f.seed},
          {"strategy", strategy_json(f.strategy)},
          {"robust_rate_bits", f.robust_rate_bits},
          {"dest_sinr", f.dest_sinr},
          {"worst_eve_sinr", f.worst_eve_sinr},
          {"trace_bits", f.trace_bits},
          {"outer_iters", f.outer_iters},
          {"solver_calls", f.solver_calls},
          {"restarts", f.restarts},
          {"converged", f.converged},
          {"note", f.note}};
}

inline SolutionFile solution_from_json(const nlohmann::json& j) {
  SolutionFile f;
  f.scenario = scenario_from_config_string(j.at("scenario_config").get<std::string>());
  const auto& p = j.at("placement");
  if (!p.is_array() || p.size() != 2) throw std::runtime_error("placement: expected [x, y]");
  f.placement = {p[0].get<double>(), p[1].get<double>()};
  f.seed = j.at("seed").get<std::uint64_t>();
  f.strategy = strategy_from_json(j.at("strategy"));
  f.robust_rate_bits = j.at("robust_rate_bits").get<double>();
  f.dest_sinr = j.at("dest_sinr").get<double>();
  f.worst_eve_sinr = j.at("worst_eve_sinr").get<std::vector<double>>();
  f.trace_bits = j.at("trace_bits").get<std::vector<double>>();
  f.outer_iters = j.at("outer_iters").get<int>();
  f.solver_calls = j.at("solver_calls").get<int>();
  f.restarts = j.at("restarts").get<int>();
  f.converged = j.at("converged").get<bool>();
  f.note = j.at("note").get<std::string>();
  return f;
}

inline SolutionFile pack_solution(const Scenario& s, const Placement& p, std::uint64_t seed,
                                  const InnerResult& r) {
  SolutionFile f;
  f.scenario = s;
  f.placement = p;
  f.seed = seed;
  f.strategy = r.strategy;
  f.robust_rate_bits = r.robust_rate_bits;
  f.dest_sinr = r.dest_sinr;
  f.worst_eve_sinr = r.worst_eve_sinr;
  f.trace_bits = r.trace_bits;
  f.outer_iters = r.outer_iters;
  f.solver_calls = r.solver_calls;
  f.restarts = r.restarts;
  f.converged = r.converged;
  f.note = r.note;
  return f;
}

inline nlohmann::json report_json(const WorstCaseResult& r) {
  return {{"rate_bits", r.rate_bits},
          {"dest_sinr", r.dest_sinr},
          {"eve_sinr", r.eve_sinr},
          {"worst_eve", r.worst_eve}};
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  f >> j;
  return j;
}

inline void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline void dump_expr_rows(std::ostream& os, const std::string& kind, int idx,
                           const conic::LinExpr& e) {
  if (e.c0 != 0.0) os << kind << " " << idx << " -1 " << e.c0 << "\n";
  for (const auto& [var, coef] : e.terms) os << kind << " " << idx << " " << var << " " << coef << "\n";
}

}  // namespace detail

/**
 * Plain-text dump of one assembled real program. Matrix rows use the five
 * column layout `block i j var value`, where var -1 carries the constant
 * part and symmetric entries are written once with i <= j. Linear pieces
 * use `kind index var value` rows with the same -1 convention.
 */
inline void dump_problem(std::ostream& os, const conic::Problem& p, const std::string& tag) {
  os.precision(17);
  os << "problem " << tag << " vars=" << p.n << " lmis=" << p.blocks.size()
     << " lincons=" << p.lincons.size() << " logcons=" << p.logcons.size()
     << " objlogs=" << p.obj_logs.size() << "\n";
  os << "# lmi rows: block i j var value (var -1 is the constant matrix, i <= j)\n";
  os << "# lin/log/obj rows: kind index var value (index -1 on obj rows)\n";

  if (p.obj_const != 0.0) os << "obj -1 -1 " << p.obj_const << "\n";
  detail::dump_expr_rows(os, "obj", -1, p.obj);
  for (std::size_t k = 0; k < p.obj_logs.size(); ++k) {
    os << "objlog " << k << " weight " << p.obj_logs[k].weight << "\n";
    detail::dump_expr_rows(os, "objlogarg", static_cast<int>(k), p.obj_logs[k].arg);
  }

  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    os << "lmi " << b << " dim " << blk.dim << " label " << blk.label << "\n";
    for (int i = 0; i < blk.dim; ++i)
      for (int j = i; j < blk.dim; ++j)
        if (blk.c0(i, j) != 0.0) os << b << " " << i << " " << j << " -1 " << blk.c0(i, j) << "\n";
    for (const auto& [var, mat] : blk.coeff)
      for (int i = 0; i < blk.dim; ++i)
        for (int j = i; j < blk.dim; ++j)
          if (mat(i, j) != 0.0) os << b << " " << i << " " << j << " " << var << " " << mat(i, j) << "\n";
  }

  for (std::size_t l = 0; l < p.lincons.size(); ++l) {
    os << "lin " << l << " label " << p.lincons[l].label << "\n";
    detail::dump_expr_rows(os, "linrow", static_cast<int>(l), p.lincons[l].expr);
  }
  for (std::size_t g = 0; g < p.logcons.size(); ++g) {
    os << "log " << g << " label " << p.logcons[g].label << "\n";
    detail::dump_expr_rows(os, "logarg", static_cast<int>(g), p.logcons[g].arg);
    detail::dump_expr_rows(os, "loglin", static_cast<int>(g), p.logcons[g].lin);
  }
  for (int v = 0; v < p.n; ++v) {
    double lo = v < p.lb.size() ? p.lb(v) : -conic::kInf;
    double hi = v < p.ub.size() ? p.ub(v) : conic::kInf;
    if (lo != -conic::kInf || hi != conic::kInf) os << "bound " << v << " " << lo << " " << hi << "\n";
  }
}

}  // namespace arisjam
