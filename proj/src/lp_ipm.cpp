#include "dantzig/lp_ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "dantzig/errors.hpp"

namespace dantzig {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " is not finite");
}

}  // namespace

LpProblem::LpProblem(Vector c_in, Matrix F_in, Vector b_in)
    : c(std::move(c_in)), F(std::move(F_in)), b(std::move(b_in)) {
  if (c.size() != F.cols() || b.size() != F.rows())
    throw DimensionMismatch("LP with c of length " + std::to_string(c.size()) +
                            ", F of shape " + std::to_string(F.rows()) + "x" +
                            std::to_string(F.cols()) + ", b of length " +
                            std::to_string(b.size()));
  require_finite(c, "c");
  require_finite(b, "b");
  if (!F.allFinite()) throw InvalidArgument("F is not finite");
}

Vector LpProblem::constraint_values(const Vector& x) const { return F * x - b; }
Vector LpProblem::apply_f(const Vector& dx) const { return F * dx; }
Vector LpProblem::apply_ft(const Vector& lambda) const {
  return F.transpose() * lambda;
}
double LpProblem::rhs_dot(const Vector& lambda) const { return b.dot(lambda); }

Vector LpProblem::solve_reduced(const Vector& weights, const Vector& rhs) const {
  Matrix h = F.transpose() * weights.asDiagonal() * F;
  return spd_solve(h, rhs);
}

DantzigLpStructure::DantzigLpStructure(Matrix U_in, Vector y_tilde_in,
                                       Vector delta_in)
    : U(std::move(U_in)), y_tilde(std::move(y_tilde_in)),
      delta(std::move(delta_in)) {
  const Eigen::Index p = U.rows();
  if (U.cols() != p || y_tilde.size() != p || delta.size() != p)
    throw DimensionMismatch("Dantzig LP needs a p x p Gram matrix and p-vectors");
  if (!U.allFinite()) throw InvalidArgument("U is not finite");
  require_finite(y_tilde, "y_tilde");
  require_finite(delta, "delta");
  for (Eigen::Index i = 0; i < p; ++i)
    if (!(delta(i) > 0.0))
      throw InvalidArgument("threshold " + std::to_string(i) +
                            " is not positive");
  double scale = std::max(1.0, U.cwiseAbs().maxCoeff());
  if ((U - U.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("U is not symmetric");
  c_ = Vector::Zero(2 * p);
  c_.tail(p).setOnes();
}

Vector DantzigLpStructure::constraint_values(const Vector& x) const {
  const Eigen::Index n = p();
  auto b = x.head(n);
  auto u = x.tail(n);
  Vector ub = U * b;
  Vector f(4 * n);
  f.segment(0, n) = b - u;
  f.segment(n, n) = -b - u;
  f.segment(2 * n, n) = ub - delta - y_tilde;
  f.segment(3 * n, n) = -ub - delta + y_tilde;
  return f;
}

Vector DantzigLpStructure::apply_f(const Vector& dx) const {
  const Eigen::Index n = p();
  auto b = dx.head(n);
  auto u = dx.tail(n);
  Vector ub = U * b;
  Vector out(4 * n);
  out.segment(0, n) = b - u;
  out.segment(n, n) = -b - u;
  out.segment(2 * n, n) = ub;
  out.segment(3 * n, n) = -ub;
  return out;
}

Vector DantzigLpStructure::apply_ft(const Vector& lambda) const {
  const Eigen::Index n = p();
  auto l1 = lambda.segment(0, n);
  auto l2 = lambda.segment(n, n);
  auto l3 = lambda.segment(2 * n, n);
  auto l4 = lambda.segment(3 * n, n);
  Vector out(2 * n);
  out.head(n) = l1 - l2 + U * (l3 - l4);
  out.tail(n) = -l1 - l2;
  return out;
}

double DantzigLpStructure::rhs_dot(const Vector& lambda) const {
  const Eigen::Index n = p();
  return (delta + y_tilde).dot(lambda.segment(2 * n, n)) +
         (delta - y_tilde).dot(lambda.segment(3 * n, n));
}

// F^T P F = [[P1+P2+U(P3+P4)U, P2-P1], [P2-P1, P1+P2]]; eliminating du
// leaves (diag(4 P1 P2 / (P1+P2)) + U (P3+P4) U) db = r1 - (P2-P1)/(P1+P2) r2.
Vector DantzigLpStructure::solve_reduced(const Vector& weights,
                                         const Vector& rhs) const {
  const Eigen::Index n = p();
  auto p1 = weights.segment(0, n).array();
  auto p2 = weights.segment(n, n).array();
  Vector p34 = weights.segment(2 * n, n) + weights.segment(3 * n, n);
  Eigen::ArrayXd sum12 = p1 + p2;
  Eigen::ArrayXd diff21 = p2 - p1;
  Vector d12 = (4.0 * p1 * p2 / sum12).matrix();
  Vector r1 = rhs.head(n);
  Vector r2 = rhs.tail(n);
  Vector reduced_rhs = r1.array() - diff21 / sum12 * r2.array();

  Vector db;
  bool solved = false;
  if (design != nullptr && design->rows() < design->cols()) {
    try {
      db = smw_solve(d12, *design, p34, reduced_rhs);
      solved = true;
    } catch (const SingularSystem&) {
    }
  }
  if (!solved) db = dense_weighted_gram_solve(d12, U, p34, reduced_rhs);

  Vector out(2 * n);
  out.head(n) = db;
  out.tail(n) = (r2.array() - diff21 * db.array()) / sum12;
  return out;
}

LpProblem DantzigLpStructure::to_dense() const {
  const Eigen::Index n = p();
  Matrix F = Matrix::Zero(4 * n, 2 * n);
  Matrix eye = Matrix::Identity(n, n);
  F.block(0, 0, n, n) = eye;
  F.block(0, n, n, n) = -eye;
  F.block(n, 0, n, n) = -eye;
  F.block(n, n, n, n) = -eye;
  F.block(2 * n, 0, n, n) = U;
  F.block(3 * n, 0, n, n) = -U;
  Vector b = Vector::Zero(4 * n);
  b.segment(2 * n, n) = delta + y_tilde;
  b.segment(3 * n, n) = delta - y_tilde;
  return LpProblem(c_, std::move(F), std::move(b));
}

DantzigLpStructure assemble_dantzig_lp(Matrix U, Vector y_tilde, Vector delta) {
  return DantzigLpStructure(std::move(U), std::move(y_tilde), std::move(delta));
}

IpmState make_state(const LpModel& model, Vector x, Vector lambda, double t) {
  if (x.size() != model.num_vars() || lambda.size() != model.num_constraints())
    throw DimensionMismatch("state dimensions do not match the LP");
  if (!(t > 0.0)) throw InvalidArgument("barrier parameter must be positive");
  IpmState s{std::move(x), std::move(lambda), t, {}};
  s.f_vals = model.constraint_values(s.beta);
  if (!(s.f_vals.array() < 0.0).all())
    throw InvalidArgument("start is not strictly primal feasible");
  if (!(s.lambda_dual.array() > 0.0).all())
    throw InvalidArgument("start has non-positive dual variables");
  return s;
}

Residuals residuals(const IpmState& state, const LpModel& model) {
  Residuals r;
  r.dual = model.objective() + model.apply_ft(state.lambda_dual);
  r.cent = -state.lambda_dual.cwiseProduct(state.f_vals).array() -
           1.0 / state.t_barrier;
  return r;
}

NewtonStep newton_step(const IpmState& state, const LpModel& model) {
  Residuals r = residuals(state, model);
  // P = lambda / (-f) > 0 makes F^T P F positive definite.
  Vector weights = state.lambda_dual.array() / (-state.f_vals.array());
  Vector cent_over_f = r.cent.array() / state.f_vals.array();
  Vector rhs = -r.dual - model.apply_ft(cent_over_f);
  NewtonStep step;
  try {
    step.d_beta = model.solve_reduced(weights, rhs);
  } catch (const NumericalError& e) {
    throw StepFailure(std::string("Newton system: ") + e.what());
  }
  if (!step.d_beta.allFinite())
    throw StepFailure("Newton system produced non-finite step");
  step.d_lambda =
      weights.cwiseProduct(model.apply_f(step.d_beta)) + cent_over_f;
  return step;
}

namespace {

double residual_norm(const Vector& dual, const Vector& cent) {
  return std::sqrt(dual.squaredNorm() + cent.squaredNorm());
}

}  // namespace

double line_search(const IpmState& state, const NewtonStep& step,
                   const LpModel& model, const IpmOptions& opts) {
  const Vector& lam = state.lambda_dual;
  const Vector& f = state.f_vals;
  Vector df = model.apply_f(step.d_beta);
  double s_max = 1.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (step.d_lambda(i) < 0.0) s_max = std::min(s_max, -lam(i) / step.d_lambda(i));
    if (df(i) > 0.0) s_max = std::min(s_max, -f(i) / df(i));
  }
  double s = s_max < 1.0 ? opts.boundary_shrink * s_max : 1.0;

  Residuals r0 = residuals(state, model);
  const double norm0 = residual_norm(r0.dual, r0.cent);
  // A null step cannot decrease the residual; taking it in full is a no-op.
  if (norm0 == 0.0 || (step.d_beta.isZero(0.0) && step.d_lambda.isZero(0.0)))
    return s;
  Vector ft_dlam = model.apply_ft(step.d_lambda);
  const double inv_t = 1.0 / state.t_barrier;
  while (s >= opts.min_step) {
    Vector lam_s = lam + s * step.d_lambda;
    Vector f_s = f + s * df;
    if ((lam_s.array() > 0.0).all() && (f_s.array() < 0.0).all()) {
      Vector dual_s = r0.dual + s * ft_dlam;
      Vector cent_s = -lam_s.cwiseProduct(f_s).array() - inv_t;
      if (residual_norm(dual_s, cent_s) <= (1.0 - opts.armijo * s) * norm0)
        return s;
    }
    s *= opts.backtrack;
  }
  throw StepFailure("line search step fell below " +
                    std::to_string(opts.min_step));
}

LpSolution solve_lp(const LpModel& model, IpmState state,
                    const IpmOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const double m = static_cast<double>(model.num_constraints());
  const Vector& c = model.objective();
  if (!(state.f_vals.array() < 0.0).all() ||
      !(state.lambda_dual.array() > 0.0).all())
    throw InvalidArgument("solve_lp needs a strictly interior start");

  SolverStats stats;
  auto measure = [&](const IpmState& s) {
    stats.final_surrogate_gap = -s.f_vals.dot(s.lambda_dual);
    stats.final_dual_residual_norm =
        (c + model.apply_ft(s.lambda_dual)).norm();
    stats.objective = c.dot(s.beta);
    stats.duality_gap = stats.objective + model.rhs_dot(s.lambda_dual);
  };
  auto done = [&]() {
    return stats.final_surrogate_gap <=
               opts.tol_gap * (1.0 + std::abs(stats.objective)) &&
           stats.final_dual_residual_norm <= opts.tol_feas;
  };

  measure(state);
  stats.converged = done();
  while (!stats.converged && stats.newton_iterations < opts.max_iterations) {
    state.t_barrier =
        std::max(state.t_barrier, opts.mu * m / stats.final_surrogate_gap);
    double s = 0.0;
    try {
      NewtonStep step = newton_step(state, model);
      s = line_search(state, step, model, opts);
      state.beta += s * step.d_beta;
      state.lambda_dual += s * step.d_lambda;
    } catch (const StepFailure& e) {
      stats.status = "step_failure";
      stats.message = e.what();
      break;
    }
    state.f_vals = model.constraint_values(state.beta);
    // Recomputed f can lose strictness to rounding once the iterate sits
    // within machine precision of a face.
    if (!(state.f_vals.array() < 0.0).all()) {
      stats.status = "step_failure";
      stats.message = "iterate left the strict interior";
      break;
    }
    ++stats.newton_iterations;
    measure(state);
    stats.converged = done();
    if (opts.observer)
      opts.observer({stats.newton_iterations, state.t_barrier,
                     stats.final_surrogate_gap, stats.final_dual_residual_norm,
                     s, state.lambda_dual.minCoeff(), state.f_vals.maxCoeff()});
  }
  if (!stats.converged && stats.status == "converged")
    stats.status = "max_iterations";
  stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(state.beta), std::move(state.lambda_dual), stats};
}

IpmState dantzig_start(const DesignMatrix& x, const Vector& y,
                       const DantzigLpStructure& lp) {
  const Matrix& xm = x.entries();
  const Eigen::Index n = xm.rows(), p = xm.cols();
  const bool wide = n <= p;
  // Ridge fit through one eigendecomposition of the smaller Gram matrix:
  // wide: r = eps (XX^T + eps)^{-1} y; tall: beta = (X^T X + eps)^{-1} X^T y.
  Matrix small = wide ? Matrix(xm * xm.transpose()) : lp.U;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(small);
  const Vector& evals = eig.eigenvalues();
  const Matrix& evecs = eig.eigenvectors();
  Vector proj = evecs.transpose() * (wide ? y : lp.y_tilde);
  double eps = 1e-2 * small.trace() / static_cast<double>(n);
  if (!(eps > 0.0)) eps = 1e-2;

  for (int halving = 0; halving < 400; ++halving, eps *= 0.5) {
    Vector scaled = proj.array() / (evals.array().max(0.0) + eps);
    Vector beta, corr;
    if (wide) {
      Vector a = evecs * scaled;  // (XX^T + eps)^{-1} y
      beta = xm.transpose() * a;
      corr = eps * (xm.transpose() * a);
    } else {
      beta = evecs * scaled;
      corr = xm.transpose() * (y - xm * beta);
    }
    if ((corr.array().abs() < 0.99 * lp.delta.array()).all()) {
      Vector ab = beta.cwiseAbs();
      Vector u = 1.05 * ab.array() + 0.01 * ab.maxCoeff() + 1e-6;
      Vector xv(2 * p);
      xv << beta, u;
      Vector f = lp.constraint_values(xv);
      if (!(f.array() < 0.0).all()) continue;
      Vector lambda = (-f).cwiseInverse();
      return make_state(lp, std::move(xv), std::move(lambda), 1.0);
    }
  }
  throw InfeasibleCalibration(
      "no strictly feasible start: thresholds are too small for this design; "
      "increase lambda");
}

DantzigSolution solve_dantzig_lp(const DesignMatrix& x, const Vector& y,
                                 const Vector& delta, const IpmOptions& opts) {
  const Eigen::Index p = x.cols();
  if (y.size() != x.rows())
    throw DimensionMismatch("y has length " + std::to_string(y.size()) +
                            ", X has " + std::to_string(x.rows()) + " rows");
  if (delta.size() != p)
    throw DimensionMismatch("delta has length " + std::to_string(delta.size()) +
                            ", X has " + std::to_string(p) + " columns");
  require_finite(y, "y");
  DantzigLpStructure lp(x.gram(), x.entries().transpose() * y, delta);
  lp.design = &x;

  // Zero is optimal whenever it is feasible.
  if ((lp.y_tilde.array().abs() <= delta.array()).all()) {
    DantzigSolution out{Vector::Zero(p), Vector::Zero(p), {}};
    out.stats.converged = true;
    return out;
  }
  IpmState start = dantzig_start(x, y, lp);
  LpSolution sol = solve_lp(lp, std::move(start), opts);
  return {sol.beta.head(p), sol.beta.tail(p), sol.stats};
}

}  // namespace dantzig
