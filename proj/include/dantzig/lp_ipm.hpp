#pragma once

#include <functional>
#include <string>

#include "dantzig/matrix.hpp"

namespace dantzig {

/// Inequality-form linear program min c^T x subject to F x <= b. The solver
/// only touches F through the products and the reduced Newton solve below,
/// which lets the Dantzig LP use its block structure.
class LpModel {
 public:
  virtual ~LpModel() = default;
  virtual Eigen::Index num_vars() const = 0;
  virtual Eigen::Index num_constraints() const = 0;
  virtual const Vector& objective() const = 0;
  /// f = F x - b
  virtual Vector constraint_values(const Vector& x) const = 0;
  virtual Vector apply_f(const Vector& dx) const = 0;
  virtual Vector apply_ft(const Vector& lambda) const = 0;
  virtual double rhs_dot(const Vector& lambda) const = 0;
  /// Solves (F^T diag(weights) F) dx = rhs, weights > 0.
  virtual Vector solve_reduced(const Vector& weights, const Vector& rhs) const = 0;
};

/// Dense LP, used directly for small problems and as a reference for the
/// structured path.
struct LpProblem final : LpModel {
  Vector c;
  Matrix F;
  Vector b;

  LpProblem(Vector c, Matrix F, Vector b);

  Eigen::Index num_vars() const override { return F.cols(); }
  Eigen::Index num_constraints() const override { return F.rows(); }
  const Vector& objective() const override { return c; }
  Vector constraint_values(const Vector& x) const override;
  Vector apply_f(const Vector& dx) const override;
  Vector apply_ft(const Vector& lambda) const override;
  double rhs_dot(const Vector& lambda) const override;
  Vector solve_reduced(const Vector& weights, const Vector& rhs) const override;
};

/// The Dantzig LP in variables (beta, u) of length 2p:
///   F = [I, -I; -I, -I; U, 0; -U, 0],  b = (0, 0, delta + y~, delta - y~),
///   c = (0, 1),  U = X^T X,  y~ = X^T y.
struct DantzigLpStructure final : LpModel {
  Matrix U;
  Vector y_tilde;
  Vector delta;
  /// When set and n < p, Newton systems go through smw_solve on X.
  const DesignMatrix* design = nullptr;

  DantzigLpStructure(Matrix U, Vector y_tilde, Vector delta);

  Eigen::Index p() const { return U.rows(); }
  Eigen::Index num_vars() const override { return 2 * p(); }
  Eigen::Index num_constraints() const override { return 4 * p(); }
  const Vector& objective() const override { return c_; }
  Vector constraint_values(const Vector& x) const override;
  Vector apply_f(const Vector& dx) const override;
  Vector apply_ft(const Vector& lambda) const override;
  double rhs_dot(const Vector& lambda) const override;
  Vector solve_reduced(const Vector& weights, const Vector& rhs) const override;

  /// The same LP with F and b materialized.
  LpProblem to_dense() const;

 private:
  Vector c_;
};

DantzigLpStructure assemble_dantzig_lp(Matrix U, Vector y_tilde, Vector delta);

struct IpmState {
  Vector beta;
  Vector lambda_dual;
  double t_barrier = 1.0;
  Vector f_vals;
};

/// State at (x, lambda, t) with f evaluated; throws unless strictly interior.
IpmState make_state(const LpModel& model, Vector x, Vector lambda, double t);

struct IterationRecord {
  int iteration;
  double t_barrier;
  double surrogate_gap;
  double dual_residual_norm;
  double step;
  double min_lambda;
  double max_f;
};

struct IpmOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iterations = 100;
  double mu = 10.0;
  double boundary_shrink = 0.99;
  double backtrack = 0.5;
  double armijo = 0.01;
  double min_step = 1e-10;
  /// Called after every accepted step.
  std::function<void(const IterationRecord&)> observer;
};

struct SolverStats {
  int newton_iterations = 0;
  double final_surrogate_gap = 0.0;
  double final_dual_residual_norm = 0.0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  /// c^T x at the returned point.
  double objective = 0.0;
  /// c^T x + b^T lambda, the gap to the dual bound.
  double duality_gap = 0.0;
  /// "converged", "max_iterations" or "step_failure".
  std::string status = "converged";
  std::string message;
};

struct Residuals {
  Vector dual;  // c + F^T lambda
  Vector cent;  // -lambda .* f - 1/t
};

Residuals residuals(const IpmState& state, const LpModel& model);

struct NewtonStep {
  Vector d_beta;
  Vector d_lambda;
};

/// Throws StepFailure when the reduced system cannot be factored.
NewtonStep newton_step(const IpmState& state, const LpModel& model);

/// Largest s <= 1 that keeps the iterate strictly interior (after the
/// boundary shrink) and satisfies the Armijo decrease of ||(r_dual, r_cent)||.
/// Throws StepFailure when s drops below opts.min_step.
double line_search(const IpmState& state, const NewtonStep& step,
                   const LpModel& model, const IpmOptions& opts = {});

struct LpSolution {
  Vector beta;
  Vector lambda_dual;
  SolverStats stats;
};

/// Primal-dual interior-point iterations from a strictly interior start.
/// Non-convergence is reported in stats, never thrown.
LpSolution solve_lp(const LpModel& model, IpmState start,
                    const IpmOptions& opts = {});

struct DantzigSolution {
  Vector beta_hat;
  Vector u;
  SolverStats stats;
};

/// Strictly interior start from a ridge fit; throws InfeasibleCalibration
/// when no ridge parameter brings |X^T r| below 0.99 delta.
IpmState dantzig_start(const DesignMatrix& x, const Vector& y,
                       const DantzigLpStructure& lp);

/// min ||beta||_1 subject to |X^T (y - X beta)|_i <= delta_i.
DantzigSolution solve_dantzig_lp(const DesignMatrix& x, const Vector& y,
                                 const Vector& delta,
                                 const IpmOptions& opts = {});

}  // namespace dantzig
