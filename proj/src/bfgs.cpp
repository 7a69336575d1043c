#include "czgrape/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace czgrape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  Eigen::VectorXd grad;
};

// Strong-Wolfe line search, bracket + zoom (Nocedal & Wright, Alg. 3.5/3.6).
// phi(a) = f(x + a p). Returns ok=false when no acceptable step was found.
class LineSearch {
 public:
  LineSearch(const ObjectiveFn& fg, const Eigen::VectorXd& x,
             const Eigen::VectorXd& p, double f0, double dphi0,
             const BfgsOptions& opt, double alpha_max)
      : fg_(fg), x_(x), p_(p), f0_(f0), dphi0_(dphi0), opt_(opt),
        alpha_max_(alpha_max), trial_(x.size()), grad_(x.size()) {}

  LineSearchResult run(double alpha_first) {
    double alpha_prev = 0.0, phi_prev = f0_;
    double alpha = std::min(alpha_first, alpha_max_);
    const double alpha_max = alpha_max_;
    for (int i = 0; i < opt_.max_ls_evals && evals_ < opt_.max_ls_evals; ++i) {
      double phi = eval(alpha);
      if (phi > f0_ + opt_.c1 * alpha * dphi0_ || (i > 0 && phi >= phi_prev))
        return zoom(alpha_prev, phi_prev, alpha);
      double dphi = grad_.dot(p_);
      if (std::abs(dphi) <= -opt_.c2 * dphi0_) return accept(alpha, phi);
      if (dphi >= 0.0) return zoom(alpha, phi, alpha_prev);
      alpha_prev = alpha;
      phi_prev = phi;
      alpha = std::min(2.0 * alpha, alpha_max);
      if (alpha_prev >= alpha_max) break;
    }
    return fallback();
  }

 private:
  double eval(double alpha) {
    trial_ = x_ + alpha * p_;
    double f = fg_(trial_, grad_);
    ++evals_;
    if (std::isfinite(f) && f < best_f_) {
      best_f_ = f;
      best_alpha_ = alpha;
      best_grad_ = grad_;
    }
    return f;
  }

  LineSearchResult accept(double alpha, double f) {
    LineSearchResult r;
    r.ok = true;
    r.alpha = alpha;
    r.f = f;
    r.grad = grad_;
    return r;
  }

  // Accept the best sufficient-decrease point seen even though the curvature
  // condition failed; the caller guards the quasi-Newton update separately.
  // Re-evaluate there so the objective's last evaluation is the point the
  // caller adopts (observers may read per-evaluation state afterwards).
  LineSearchResult fallback() {
    if (best_alpha_ > 0.0 && best_f_ < f0_ + opt_.c1 * best_alpha_ * dphi0_) {
      trial_ = x_ + best_alpha_ * p_;
      double f = fg_(trial_, grad_);
      LineSearchResult r;
      r.ok = true;
      r.alpha = best_alpha_;
      r.f = f;
      r.grad = grad_;
      return r;
    }
    return {};
  }

  // Bisection zoom; only phi_lo needs tracking with midpoint trial steps.
  LineSearchResult zoom(double lo, double phi_lo, double hi) {
    for (int i = 0; i < 40 && evals_ < opt_.max_ls_evals; ++i) {
      double alpha = 0.5 * (lo + hi);
      if (!(std::abs(hi - lo) > 1e-16 * (1.0 + std::abs(lo)))) break;
      double phi = eval(alpha);
      if (phi > f0_ + opt_.c1 * alpha * dphi0_ || phi >= phi_lo) {
        hi = alpha;
      } else {
        double dphi = grad_.dot(p_);
        if (std::abs(dphi) <= -opt_.c2 * dphi0_) return accept(alpha, phi);
        if (dphi * (hi - lo) >= 0.0) hi = lo;
        lo = alpha;
        phi_lo = phi;
      }
    }
    return fallback();
  }

  const ObjectiveFn& fg_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& p_;
  double f0_, dphi0_;
  const BfgsOptions& opt_;
  double alpha_max_;
  Eigen::VectorXd trial_, grad_;
  int evals_ = 0;
  double best_f_ = kInf;
  double best_alpha_ = 0.0;
  Eigen::VectorXd best_grad_;
};

}  // namespace

BfgsReport minimize_bfgs(const ObjectiveFn& fg, Eigen::VectorXd& x,
                         const BfgsOptions& opt, const IterCallback& callback) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd grad(n);
  double f = fg(x, grad);
  if (!std::isfinite(f))
    throw std::runtime_error("bfgs: objective is not finite at the start");

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool h_is_fresh = true;   // no curvature information folded in yet
  bool h_was_reset = false; // one reset-and-retry after a failed search
  int stall_count = 0;

  BfgsReport report;
  report.final_f = f;
  report.final_grad_norm = grad.lpNorm<Eigen::Infinity>();

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    if (f <= opt.target_f) {
      report.status = BfgsStatus::target_reached;
      return report;
    }
    if (report.final_grad_norm <= opt.grad_tol) {
      report.status = BfgsStatus::gradient_converged;
      return report;
    }

    Eigen::VectorXd p = -(h * grad);
    double dphi0 = grad.dot(p);
    if (!(dphi0 < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      h.setIdentity();
      h_is_fresh = true;
      p = -grad;
      dphi0 = grad.dot(p);
      if (!(dphi0 < 0.0)) {
        report.status = BfgsStatus::gradient_converged;
        return report;
      }
    }

    double pmax = p.lpNorm<Eigen::Infinity>();
    double alpha_cap = kInf;
    if (opt.step_cap > 0.0 && pmax > 0.0) alpha_cap = opt.step_cap / pmax;
    double alpha_first = std::min(1.0, alpha_cap);
    if (h_is_fresh && opt.first_step_cap > 0.0 && pmax > 0.0)
      alpha_first = std::min(alpha_first, opt.first_step_cap / pmax);

    LineSearch search(fg, x, p, f, dphi0, opt,
                      std::isfinite(alpha_cap) ? alpha_cap : 1e8);
    LineSearchResult step = search.run(alpha_first);
    if (!step.ok) {
      if (!h_was_reset && !h_is_fresh) {
        h.setIdentity();
        h_is_fresh = true;
        h_was_reset = true;
        continue;  // retry this iterate with a steepest-descent direction
      }
      report.status = BfgsStatus::line_search_failed;
      return report;
    }
    h_was_reset = false;

    Eigen::VectorXd s = step.alpha * p;
    Eigen::VectorXd y = step.grad - grad;
    double sy = s.dot(y);

    double improvement = (f - step.f) / std::max(std::abs(f), 1e-300);
    x += s;
    f = step.f;
    grad = step.grad;

    report.iterations = iter;
    report.final_f = f;
    report.final_grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (callback && !callback(iter, x, f, report.final_grad_norm)) {
      report.status = BfgsStatus::callback_stop;
      return report;
    }

    if (improvement < opt.stall_rel) {
      if (++stall_count >= opt.stall_window) {
        report.status = BfgsStatus::no_progress;
        return report;
      }
    } else {
      stall_count = 0;
    }

    // Guarded BFGS update; skip when curvature information is unusable.
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_fresh) {
        h = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(n, n);
        h_is_fresh = false;
      }
      double rho = 1.0 / sy;
      Eigen::VectorXd hy = h * y;
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      double yhy = y.dot(hy);
      h.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
      h.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    }
  }

  report.status = (f <= opt.target_f) ? BfgsStatus::target_reached
                                      : BfgsStatus::max_iterations;
  return report;
}

}  // namespace czgrape
