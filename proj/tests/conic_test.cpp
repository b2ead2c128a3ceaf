#include "arisjam/conic.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "arisjam/affine.hpp"
#include "arisjam/rng.hpp"

using namespace arisjam;
using conic::Problem;
using conic::Status;

namespace {

conic::LmiBlock sym_block(const std::string& label, const Eigen::MatrixXd& c0,
                          std::vector<std::pair<int, Eigen::MatrixXd>> coeff) {
  conic::LmiBlock b;
  b.label = label;
  b.dim = (int)c0.rows();
  b.c0 = c0;
  b.coeff = std::move(coeff);
  return b;
}

}  // namespace

TEST(Conic, OffDiagonalScalarLmi) {
  // maximize t s.t. [[1, t], [t, 1]] >= 0  ->  t = 1
  Problem p;
  int t = p.add_var();
  p.obj = conic::LinExpr::variable(t);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  p.blocks.push_back(sym_block("offdiag", Eigen::MatrixXd::Identity(2, 2), {{t, a}}));
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
  EXPECT_LE(r.gap, 1e-8 * 2 + 1e-9 + 1e-12);
}

TEST(Conic, TraceCapOnPsdMatrix) {
  // maximize tr(Z) s.t. Z >= 0 (complex hermitian 2x2), tr(Z) <= pj
  const double pj = 0.31622776601683794;
  Problem p;
  HermVars zv = add_hermitian(p, 2);
  p.obj = zv.trace_expr();
  p.blocks.push_back(zv.affine().realify_block("z psd"));
  p.lincons.push_back({"power cap", conic::LinExpr::constant(pj) - zv.trace_expr()});
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, pj, 1e-6);
  Eigen::MatrixXcd z = zv.value(r.y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(z, Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
}

TEST(Conic, SmallestEigenvalueCrossCheck) {
  // maximize lambda s.t. A - lambda I >= 0 -> lambda_min(A)
  auto rng = make_rng(201);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd g = complex_normal_matrix(4, 4, rng);
    Eigen::MatrixXcd a = 0.5 * (g + g.adjoint()) + 3.0 * Eigen::MatrixXcd::Identity(4, 4);
    Problem p;
    int lam = p.add_var();
    p.obj = conic::LinExpr::variable(lam);
    HermAffine h(4);
    h.add_const(a);
    h.add_coeff(lam, -Eigen::MatrixXcd::Identity(4, 4));
    p.blocks.push_back(h.realify_block("a minus lambda"));
    auto r = conic::solve(p);
    ASSERT_EQ(r.status, Status::kOptimal) << r.message;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    EXPECT_NEAR(r.objective, es.eigenvalues().minCoeff(), 1e-6);
  }
}

TEST(Conic, InfeasibleReportsViolatedLabel) {
  Problem p;
  int t = p.add_var();
  p.obj = conic::LinExpr::variable(t);
  p.lincons.push_back({"t above one", conic::LinExpr::variable(t) - conic::LinExpr::constant(1.0)});
  p.lincons.push_back({"t below minus one", conic::LinExpr::constant(-1.0) - conic::LinExpr::variable(t)});
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kInfeasible);
  EXPECT_NE(r.message.find("t "), std::string::npos);
}

TEST(Conic, UnboundedRayDetected) {
  Problem p;
  int t = p.add_var(0.0, conic::kInf);
  p.obj = conic::LinExpr::variable(t);
  auto r = conic::solve(p);
  EXPECT_EQ(r.status, Status::kUnbounded);
}

TEST(Conic, LogObjectiveTerm) {
  // maximize log(y) - y -> y* = 1, objective -1
  Problem p;
  int y = p.add_var(0.0, conic::kInf);
  p.obj = conic::LinExpr::variable(y, -1.0);
  p.obj_logs.push_back({1.0, conic::LinExpr::variable(y)});
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.y(y), 1.0, 1e-5);
  EXPECT_NEAR(r.objective, -1.0, 1e-7);
}

TEST(Conic, LogConstraint) {
  // maximize y s.t. log(2 - y) >= 0 -> y* = 1
  Problem p;
  int y = p.add_var();
  p.obj = conic::LinExpr::variable(y);
  p.logcons.push_back({"log cap", conic::LinExpr::constant(2.0) - conic::LinExpr::variable(y),
                       conic::LinExpr::constant(0.0)});
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
}

TEST(Conic, WeightedLogPair) {
  // maximize 2 log(y1) + log(y2) s.t. y1 + y2 <= 3: optimum at y1 = 2, y2 = 1
  Problem p;
  int y1 = p.add_var(0.0, conic::kInf);
  int y2 = p.add_var(0.0, conic::kInf);
  p.obj_logs.push_back({2.0, conic::LinExpr::variable(y1)});
  p.obj_logs.push_back({1.0, conic::LinExpr::variable(y2)});
  conic::LinExpr cap = conic::LinExpr::constant(3.0);
  cap.add(y1, -1.0);
  cap.add(y2, -1.0);
  p.lincons.push_back({"sum cap", cap});
  auto r = conic::solve(p);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.y(y1), 2.0, 1e-5);
  EXPECT_NEAR(r.y(y2), 1.0, 1e-5);
}

TEST(Conic, WarmStartSolvesFromPreviousPoint) {
  Problem p;
  int t = p.add_var();
  p.obj = conic::LinExpr::variable(t);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  p.blocks.push_back(sym_block("offdiag", Eigen::MatrixXd::Identity(2, 2), {{t, a}}));
  auto cold = conic::solve(p);
  ASSERT_EQ(cold.status, Status::kOptimal);

  // slightly backed-off warm start must stay feasible and converge
  Eigen::VectorXd warm = cold.y * 0.9;
  auto hot = conic::solve(p, conic::Options(), &warm);
  ASSERT_EQ(hot.status, Status::kOptimal);
  EXPECT_NEAR(hot.objective, 1.0, 1e-6);
}

TEST(Conic, PhaseOneFindsInteriorFromInfeasibleGuess) {
  Problem p;
  int t = p.add_var();
  p.obj = conic::LinExpr::variable(t) * -1.0;
  p.lincons.push_back({"t floor", conic::LinExpr::variable(t) - conic::LinExpr::constant(5.0)});
  Eigen::VectorXd warm(1);
  warm << -10.0;  // violates the floor
  auto r = conic::solve(p, conic::Options(), &warm);
  ASSERT_EQ(r.status, Status::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, -5.0, 1e-6);
}

TEST(Conic, ValidationCatchesBadIndices) {
  Problem p;
  p.add_var();
  p.obj.add(3, 1.0);  // out of range
  EXPECT_THROW(conic::solve(p), std::invalid_argument);
}

TEST(Conic, DumpContainsSections) {
  Problem p;
  int t = p.add_var(0.0, 2.0);
  p.obj = conic::LinExpr::variable(t);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  p.blocks.push_back(sym_block("blk", Eigen::MatrixXd::Identity(2, 2), {{t, a}}));
  p.lincons.push_back({"cap", conic::LinExpr::constant(1.0) - conic::LinExpr::variable(t)});
  p.logcons.push_back({"lc", conic::LinExpr::variable(t), conic::LinExpr::constant(1.0)});
  p.obj_logs.push_back({0.5, conic::LinExpr::variable(t)});
  std::ostringstream os;
  conic::dump(p, os);
  std::string s = os.str();
  EXPECT_NE(s.find("nvars 1"), std::string::npos);
  EXPECT_NE(s.find("block \"blk\" 2"), std::string::npos);
  EXPECT_NE(s.find("lin \"cap\""), std::string::npos);
  EXPECT_NE(s.find("logcon \"lc\""), std::string::npos);
  EXPECT_NE(s.find("objlog 0.5"), std::string::npos);
  EXPECT_NE(s.find("end"), std::string::npos);
}
