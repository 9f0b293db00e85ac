#include <gtest/gtest.h>

#include "dantzig/errors.hpp"
#include "dantzig/experiments.hpp"
#include "dantzig/lp_ipm.hpp"
#include "dantzig/selector.hpp"
#include "support/oracles.hpp"

using namespace dantzig;

namespace {

DantzigLpStructure random_structure(int n, int p, std::uint64_t seed, DesignMatrix* x) {
  *x = DesignMatrix(oracle::unit_columns(oracle::gaussian(n, p, seed)));
  Vector y = oracle::gaussian_vector(n, seed + 1);
  Vector delta = Vector::Constant(p, 0.3);
  return DantzigLpStructure(x->gram(), x->entries().transpose() * y, delta);
}

// Bounded LP with x = 0 strictly interior: a box |x_i| <= 10 plus random rows.
LpProblem random_box_lp(int nv, int extra, std::uint64_t seed) {
  Rng rng(seed);
  Matrix F(2 * nv + extra, nv);
  Vector b(2 * nv + extra);
  F.setZero();
  for (int i = 0; i < nv; ++i) {
    F(2 * i, i) = 1;
    F(2 * i + 1, i) = -1;
    b(2 * i) = b(2 * i + 1) = 10;
  }
  for (int k = 0; k < extra; ++k) {
    for (int i = 0; i < nv; ++i) F(2 * nv + k, i) = rng.normal();
    b(2 * nv + k) = 0.5 + rng.uniform();
  }
  Vector c(nv);
  for (int i = 0; i < nv; ++i) c(i) = rng.normal();
  return LpProblem(c, F, b);
}

IpmState random_interior(const LpModel& lp, std::uint64_t seed, double t = 1.0) {
  Rng rng(seed);
  Vector lam(lp.num_constraints());
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = 0.1 + rng.uniform();
  return make_state(lp, Vector::Zero(lp.num_vars()), lam, t);
}

}  // namespace

TEST(DantzigLp, DimensionsForThreeColumns) {
  DantzigLpStructure lp =
      assemble_dantzig_lp(Matrix::Identity(3, 3), Vector::Zero(3), Vector::Ones(3));
  LpProblem d = lp.to_dense();
  EXPECT_EQ(d.F.rows(), 12);
  EXPECT_EQ(d.F.cols(), 6);
  EXPECT_EQ(d.b.size(), 12);
  Vector c(6);
  c << 0, 0, 0, 1, 1, 1;
  EXPECT_EQ(d.c, c);
}

TEST(DantzigLp, ZeroBetaUnitU) {
  DesignMatrix x(Matrix::Identity(4, 4));
  DantzigLpStructure lp = random_structure(4, 4, 1, &x);
  Vector v(8);
  v << 0, 0, 0, 0, 1, 1, 1, 1;
  Vector f = lp.constraint_values(v);
  EXPECT_EQ(f.head(8), Vector::Constant(8, -1.0));
}

TEST(DantzigLp, RejectsBadInputs) {
  EXPECT_THROW(assemble_dantzig_lp(Matrix::Identity(2, 2), Vector::Zero(2),
                                   Eigen::Vector2d(1, 0)),
               InvalidArgument);
  Matrix u = Matrix::Identity(2, 2);
  u(0, 1) = 0.1;
  EXPECT_THROW(assemble_dantzig_lp(u, Vector::Zero(2), Vector::Ones(2)),
               InvalidArgument);
  EXPECT_THROW(assemble_dantzig_lp(Matrix::Identity(2, 2), Vector::Zero(3),
                                   Vector::Ones(2)),
               DimensionMismatch);
}

TEST(DantzigLp, StructuredOperatorsMatchDense) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    DesignMatrix x(Matrix::Identity(1, 1));
    DantzigLpStructure lp = random_structure(6, 9, seed, &x);
    LpProblem d = lp.to_dense();
    Vector v = oracle::gaussian_vector(18, seed + 10);
    Vector lam = oracle::gaussian_vector(36, seed + 11);
    EXPECT_LE((lp.constraint_values(v) - d.constraint_values(v)).norm(), 1e-12);
    EXPECT_LE((lp.apply_f(v) - d.apply_f(v)).norm(), 1e-12);
    EXPECT_LE((lp.apply_ft(lam) - d.apply_ft(lam)).norm(), 1e-12);
    EXPECT_NEAR(lp.rhs_dot(lam), d.rhs_dot(lam), 1e-12);

    Vector w = oracle::gaussian_vector(36, seed + 12).cwiseAbs().array() + 0.05;
    Vector rhs = oracle::gaussian_vector(18, seed + 13);
    Vector ref = d.solve_reduced(w, rhs);
    EXPECT_LE((lp.solve_reduced(w, rhs) - ref).norm(), 1e-8 * ref.norm());
    lp.design = &x;  // n < p: SMW path
    EXPECT_LE((lp.solve_reduced(w, rhs) - ref).norm(), 1e-8 * ref.norm());
  }
}

TEST(Residuals, CenteredPointHasZeroCentrality) {
  LpProblem lp = random_box_lp(3, 2, 1);
  Vector x = Vector::Zero(3);
  Vector f = lp.constraint_values(x);
  const double t = 7.0;
  Vector lam = (-1.0 / (t * f.array())).matrix();
  IpmState s = make_state(lp, x, lam, t);
  EXPECT_LE(residuals(s, lp).cent.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Residuals, ZeroObjectiveDualIsFtLambda) {
  LpProblem lp = random_box_lp(2, 1, 2);
  lp.c.setZero();
  IpmState s = random_interior(lp, 3);
  EXPECT_LE((residuals(s, lp).dual - lp.F.transpose() * s.lambda_dual).norm(), 1e-14);
}

TEST(Residuals, MatchesDirectFormula) {
  LpProblem lp = random_box_lp(3, 2, 4);
  Rng rng(5);
  Vector x(3);
  for (int i = 0; i < 3; ++i) x(i) = rng.uniform() - 0.5;
  x *= 0.1;
  Vector lam(8);
  for (int i = 0; i < 8; ++i) lam(i) = 0.1 + rng.uniform();
  IpmState s = make_state(lp, x, lam, 3.0);
  Residuals r = residuals(s, lp);
  for (int j = 0; j < 3; ++j) {
    long double acc = lp.c(j);
    for (int i = 0; i < 8; ++i) acc += static_cast<long double>(lp.F(i, j)) * lam(i);
    EXPECT_NEAR(r.dual(j), static_cast<double>(acc), 1e-14);
  }
  for (int i = 0; i < 8; ++i) {
    long double f = -lp.b(i);
    for (int j = 0; j < 3; ++j) f += static_cast<long double>(lp.F(i, j)) * x(j);
    EXPECT_NEAR(r.cent(i), static_cast<double>(-lam(i) * f - 1.0L / 3.0L), 1e-14);
  }
}

TEST(NewtonStep, SatisfiesLinearizedSystem) {
  LpProblem lp = random_box_lp(4, 0, 6);
  IpmState s = random_interior(lp, 7, 5.0);
  NewtonStep step = newton_step(s, lp);
  Residuals r = residuals(s, lp);
  // F^T dlam = -r_dual;  -diag(f) dlam - diag(lam) F dx = -r_cent
  Vector e1 = lp.F.transpose() * step.d_lambda + r.dual;
  Vector e2 = -s.f_vals.cwiseProduct(step.d_lambda) -
              s.lambda_dual.cwiseProduct(lp.F * step.d_beta) + r.cent;
  EXPECT_LT(e1.norm(), 1e-8);
  EXPECT_LT(e2.norm(), 1e-8);
}

TEST(NewtonStep, StructuredMatchesDense) {
  DesignMatrix x(Matrix::Identity(1, 1));
  DantzigLpStructure lp = random_structure(5, 12, 8, &x);
  lp.design = &x;
  IpmState s = dantzig_start(x, oracle::gaussian_vector(5, 9), lp);
  LpProblem d = lp.to_dense();
  NewtonStep a = newton_step(s, lp), b = newton_step(s, d);
  EXPECT_LE((a.d_beta - b.d_beta).norm(), 1e-7 * (1 + b.d_beta.norm()));
  EXPECT_LE((a.d_lambda - b.d_lambda).norm(), 1e-7 * (1 + b.d_lambda.norm()));
}

TEST(LineSearch, NullStepIsFull) {
  LpProblem lp = random_box_lp(2, 1, 10);
  IpmState s = random_interior(lp, 11);
  NewtonStep zero{Vector::Zero(2), Vector::Zero(5)};
  EXPECT_EQ(line_search(s, zero, lp), 1.0);
}

TEST(LineSearch, ShrinksBeforeDualBoundary) {
  LpProblem lp = random_box_lp(2, 1, 12);
  IpmState s = random_interior(lp, 13);
  NewtonStep step = newton_step(s, lp);
  // Force lambda_0 to hit zero at s = 0.4 along the step.
  step.d_lambda(0) = -s.lambda_dual(0) / 0.4;
  double a = line_search(s, step, lp);
  EXPECT_LE(a, 0.396 + 1e-15);
  EXPECT_GT(s.lambda_dual(0) + a * step.d_lambda(0), 0.0);
}

TEST(LineSearch, AcceptedStepReducesResidual) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    LpProblem lp = random_box_lp(3, 3, seed);
    IpmState s = random_interior(lp, seed + 100, 10.0);
    NewtonStep step = newton_step(s, lp);
    double a = line_search(s, step, lp);
    Residuals r0 = residuals(s, lp);
    IpmState next = make_state(lp, s.beta + a * step.d_beta,
                               s.lambda_dual + a * step.d_lambda, s.t_barrier);
    Residuals r1 = residuals(next, lp);
    double n0 = std::hypot(r0.dual.norm(), r0.cent.norm());
    double n1 = std::hypot(r1.dual.norm(), r1.cent.norm());
    EXPECT_LT(n1, n0) << "seed " << seed;
  }
}

TEST(SolveLp, NonnegativityBinds) {
  Matrix F(3, 2);
  F << -1, 0, 0, -1, 1, 1;
  LpProblem lp(Eigen::Vector2d(1, 0), F, Eigen::Vector3d(0, 0, 2));
  IpmState s = make_state(lp, Eigen::Vector2d(0.5, 0.5), Vector::Ones(3), 1.0);
  LpSolution sol = solve_lp(lp, s);
  EXPECT_TRUE(sol.stats.converged);
  EXPECT_NEAR(sol.stats.objective, 0.0, 1e-7);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    LpProblem lp = random_box_lp(3, 2, seed);
    LpSolution sol = solve_lp(lp, random_interior(lp, seed));
    ASSERT_TRUE(sol.stats.converged) << "seed " << seed;
    EXPECT_NEAR(sol.stats.objective, oracle::lp_vertex_min(lp.c, lp.F, lp.b), 1e-6)
        << "seed " << seed;
    EXPECT_LE(sol.stats.duality_gap, 1e-8 * (1 + std::abs(sol.stats.objective)) * 10);
  }
}

TEST(SolveLp, IterationCapReportedNotThrown) {
  LpProblem lp = random_box_lp(3, 2, 61);
  IpmOptions opts;
  opts.max_iterations = 2;
  LpSolution sol = solve_lp(lp, random_interior(lp, 62), opts);
  EXPECT_FALSE(sol.stats.converged);
  EXPECT_EQ(sol.stats.status, "max_iterations");
  EXPECT_EQ(sol.stats.newton_iterations, 2);
}

TEST(SolveLp, RejectsExteriorStart) {
  LpProblem lp = random_box_lp(2, 0, 63);
  EXPECT_THROW(make_state(lp, Vector::Constant(2, 20.0), Vector::Ones(4), 1.0),
               InvalidArgument);
  EXPECT_THROW(make_state(lp, Vector::Zero(2), Vector::Zero(4), 1.0), InvalidArgument);
}

TEST(SolveDantzig, OrthonormalMatchesSoftThreshold) {
  DesignMatrix x(oracle::orthonormal(16, 16, 70));
  Vector beta = Vector::Zero(16);
  beta(2) = 3;
  beta(9) = -1.5;
  Vector y = x.entries() * beta + 0.1 * oracle::gaussian_vector(16, 71);
  const double thr = 0.3;
  DantzigSolution sol = solve_dantzig_lp(x, y, Vector::Constant(16, thr));
  ASSERT_TRUE(sol.stats.converged);
  Vector ref = soft_threshold_orthogonal(x, y, thr);
  EXPECT_LE((sol.beta_hat - ref).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(SolveDantzig, NoiselessRecovery) {
  DesignMatrix x = gen_design(DesignKind::gaussian, 72, 256, 72);
  SparseSignal sig = gen_sparse_beta(256, 8, AmplitudeModel::gauss_shifted, 73);
  Vector y = x.entries() * sig.beta;
  DantzigSolution sol = solve_dantzig_lp(x, y, Vector::Constant(256, 1e-6));
  ASSERT_TRUE(sol.stats.converged);
  EXPECT_LE((sol.beta_hat - sig.beta).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LE(sol.stats.newton_iterations, 60);
}

TEST(SolveDantzig, StructuredEqualsGeneric) {
  for (std::uint64_t seed = 80; seed < 86; ++seed) {
    const int n = 12, p = 24 + static_cast<int>(seed % 3) * 20;
    DesignMatrix x(oracle::unit_columns(oracle::gaussian(n, p, seed)));
    Vector y = oracle::gaussian_vector(n, seed + 1);
    Vector delta = Vector::Constant(p, 0.5);
    DantzigSolution sol = solve_dantzig_lp(x, y, delta);
    ASSERT_TRUE(sol.stats.converged);
    DantzigLpStructure lp(x.gram(), x.entries().transpose() * y, delta);
    lp.design = &x;
    LpProblem dense = lp.to_dense();
    LpSolution ref = solve_lp(dense, dantzig_start(x, y, lp));
    ASSERT_TRUE(ref.stats.converged);
    EXPECT_LE((sol.beta_hat - ref.beta.head(p)).cwiseAbs().maxCoeff(), 1e-6)
        << "seed " << seed;
  }
}

TEST(SolveDantzig, IterateInvariantsAndCertificate) {
  for (std::uint64_t seed = 90; seed < 95; ++seed) {
    DesignMatrix x(oracle::unit_columns(oracle::gaussian(20, 50, seed)));
    Vector y = oracle::gaussian_vector(20, seed + 1);
    Vector delta = Vector::Constant(50, 0.4);
    double last_t = 0.0;
    const double m = 200.0;
    IpmOptions opts;
    opts.observer = [&](const IterationRecord& r) {
      EXPECT_GT(r.min_lambda, 0.0);
      EXPECT_LT(r.max_f, 0.0);
      EXPECT_GE(r.t_barrier, last_t);
      EXPECT_GT(r.step, 0.0);
      EXPECT_LE(r.step, 1.0);
      last_t = r.t_barrier;
    };
    double eta_start = 0.0;
    {
      DantzigLpStructure lp(x.gram(), x.entries().transpose() * y, delta);
      IpmState s = dantzig_start(x, y, lp);
      eta_start = -s.f_vals.dot(s.lambda_dual);
      EXPECT_NEAR(eta_start, m, 1e-9 * m);  // lambda_0 = -1/f_0 at t = 1
    }
    DantzigSolution sol = solve_dantzig_lp(x, y, delta, opts);
    ASSERT_TRUE(sol.stats.converged);
    EXPECT_LE(sol.stats.final_surrogate_gap, eta_start);
    EXPECT_LE(sol.stats.final_surrogate_gap, 1e-8 * (1 + std::abs(sol.stats.objective)));
    EXPECT_LE(sol.stats.duality_gap, 1e-8 * (1 + std::abs(sol.stats.objective)) * 1.0001);
    // Feasibility of all 4p constraints.
    Vector corr = x.entries().transpose() * (y - x.entries() * sol.beta_hat);
    EXPECT_LE((corr.cwiseAbs() - delta).maxCoeff(), 1e-6);
    EXPECT_LE((sol.beta_hat.cwiseAbs() - sol.u).maxCoeff(), 1e-6);
  }
}

TEST(SolveDantzig, BarrierFollowsGapSchedule) {
  DesignMatrix x(oracle::unit_columns(oracle::gaussian(10, 30, 96)));
  Vector y = oracle::gaussian_vector(10, 97);
  Vector delta = Vector::Constant(30, 0.3);
  std::vector<IterationRecord> recs;
  IpmOptions opts;
  opts.observer = [&](const IterationRecord& r) { recs.push_back(r); };
  ASSERT_TRUE(solve_dantzig_lp(x, y, delta, opts).stats.converged);
  // The barrier used at step k is at least mu m / eta_{k-1}.
  for (std::size_t k = 1; k < recs.size(); ++k)
    EXPECT_GE(recs[k].t_barrier * (1 + 1e-9), 10.0 * 120.0 / recs[k - 1].surrogate_gap);
}

TEST(SolveDantzig, ZeroFeasibleShortcut) {
  DesignMatrix x(oracle::unit_columns(oracle::gaussian(5, 8, 98)));
  Vector y = 0.01 * oracle::gaussian_vector(5, 99);
  DantzigSolution sol = solve_dantzig_lp(x, y, Vector::Constant(8, 1.0));
  EXPECT_TRUE(sol.stats.converged);
  EXPECT_EQ(sol.beta_hat, Vector::Zero(8));
  EXPECT_EQ(sol.stats.newton_iterations, 0);
}

TEST(SolveDantzig, ShapeErrors) {
  DesignMatrix x(oracle::gaussian(5, 8, 1));
  EXPECT_THROW(solve_dantzig_lp(x, Vector::Zero(4), Vector::Ones(8)), DimensionMismatch);
  EXPECT_THROW(solve_dantzig_lp(x, Vector::Zero(5), Vector::Ones(7)), DimensionMismatch);
}
