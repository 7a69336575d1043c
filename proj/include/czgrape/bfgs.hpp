#pragma once

#include <Eigen/Dense>
#include <functional>

namespace czgrape {

/// Evaluate f(x) and write its gradient. May return +inf to mark x as
/// infeasible (the line search then backs off); the gradient is ignored for
/// infinite values.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Called after every accepted step with the new iterate. Return false to
/// stop the minimization (reported as callback_stop).
using IterCallback = std::function<bool(int iteration, const Eigen::VectorXd& x,
                                        double f, double grad_inf_norm)>;

struct BfgsOptions {
  double target_f = -1.0;       // stop as soon as f <= target_f
  int max_iterations = 1000;
  double grad_tol = 0.0;        // stop when |grad|_inf <= grad_tol
  double c1 = 1e-4;             // sufficient-decrease constant
  double c2 = 0.9;              // curvature constant
  double first_step_cap = 0.0;  // max |dx|_inf on iteration 1 (0 disables)
  // Max |dx|_inf on EVERY iteration (0 disables). Bounds the line search at
  // alpha = step_cap/|p|_inf, keeping the walk inside the starting basin;
  // near an optimum the quasi-Newton step shrinks below any sane cap, so
  // convergence behavior is unchanged there.
  double step_cap = 0.0;
  int max_ls_evals = 60;        // objective evaluations per line search
  // Declare a stall after `stall_window` consecutive accepted steps whose
  // relative improvement stays below `stall_rel`.
  int stall_window = 50;
  double stall_rel = 1e-10;
};

enum class BfgsStatus {
  target_reached,
  gradient_converged,
  line_search_failed,
  no_progress,
  max_iterations,
  callback_stop,
};

struct BfgsReport {
  BfgsStatus status = BfgsStatus::max_iterations;
  int iterations = 0;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
};

/// Full-memory BFGS with a strong-Wolfe line search. x is updated in place to
/// the best iterate found. Deterministic: no randomness, no parallelism.
BfgsReport minimize_bfgs(const ObjectiveFn& fg, Eigen::VectorXd& x,
                         const BfgsOptions& options,
                         const IterCallback& callback = nullptr);

}  // namespace czgrape
