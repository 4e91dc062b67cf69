#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spst/hessian.hpp"
#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/problems.hpp"
#include "spst/retraction.hpp"

namespace spst {

struct LineSearchConfig {
  std::optional<double> gamma0;  // first trial step; defaults to f(x0)
  double gamma_min = 1e-15;
  double gamma_max = 1e15;
  double beta = 1e-4;   // Armijo slope fraction
  double delta = 0.1;   // backtracking shrink factor
  double alpha = 0.85;  // averaging weight of the nonmonotone reference
  bool nonmonotone = false;  // compare against the averaged reference instead of f(x_i)
};

struct CgConfig {
  std::size_t restart_period = 5;  // mu; 1 degenerates to steepest descent
};

struct TrustRegionConfig {
  double q_bar = 0.0;  // max radius; <= 0 selects sqrt(manifold dim)
  double q0 = 0.0;     // initial radius; <= 0 selects q_bar / 8
  double rho_prime = 0.1;
  double tcg_kappa = 0.1;
  double tcg_theta = 1.0;
  std::size_t tcg_max_inner = 0;  // 0 selects the manifold dimension
};

struct StoppingRule {
  double grad_tol = 1e-6;
  double min_step = 1e-11;
  std::size_t max_iter = 1000;
};

enum class TerminationReason { GradTol, StepTooSmall, MaxIter, SubproblemFailure };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::GradTol:
      return "GradTol";
    case TerminationReason::StepTooSmall:
      return "StepTooSmall";
    case TerminationReason::MaxIter:
      return "MaxIter";
    default:
      return "SubproblemFailure";
  }
}

// One telemetry row per outer iteration. `step` is the accepted step length
// for line-search methods and the trust radius for R-TR; `slope` is the
// Armijo pairing g(grad, p) for line-search methods (making the certificate
// f_next <= f + beta*step*slope re-checkable) and the ratio rho for R-TR.
struct IterationRecord {
  std::size_t iter;
  double f;
  double grad_norm;
  double step;
  double slope;
  double seconds;  // cumulative wall time when the row was written
};

struct RunReport {
  std::string method;
  std::vector<IterationRecord> iterations;
  ManifoldPoint final_point;
  double final_f;
  double final_grad_norm;
  double final_feasibility;
  TerminationReason reason;
  double wall_seconds;
};

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// --- Barzilai-Borwein line search ---------------------------------------------

// Cross-iteration state of the alternating BB step-size rule and the averaged
// reference value of the nonmonotone variant.
struct BbState {
  std::size_t i = 0;  // line-search invocation counter
  double q = 1.0;
  double c = 0.0;  // averaged reference; seeded with f(x0) on first use
  bool has_prev = false;
  DenseMatrix prev_x;
  DenseMatrix prev_grad;
};

struct BbStepResult {
  bool ok = false;  // false: step collapsed below min_step
  double tau = 0.0;
  double f_next = 0.0;
  std::optional<RetractionWork> work;  // factors of the accepted retraction
};

// One backtracked BB step along p from x. `slope` must be g(grad, p) at x.
inline BbStepResult bb_linesearch(const ObjectiveBundle& prob, const DenseMatrix& x,
                                  double f_x, const DenseMatrix& rgrad,
                                  const DenseMatrix& p, double slope, BbState& state,
                                  const LineSearchConfig& cfg,
                                  const StoppingRule& stop) {
  double gamma;
  if (!state.has_prev) {
    state.c = f_x;
    state.q = 1.0;
    gamma = cfg.gamma0.value_or(f_x);
  } else {
    DenseMatrix w = x - state.prev_x;
    DenseMatrix y = rgrad - state.prev_grad;
    double wy = std::fabs(dot(w, y));
    if (state.i % 2 == 1) {
      double ww = dot(w, w);
      gamma = ww / wy;
    } else {
      double yy = dot(y, y);
      gamma = wy / yy;
    }
    if (!std::isfinite(gamma)) gamma = cfg.gamma_max;
  }
  gamma = std::clamp(gamma, cfg.gamma_min, cfg.gamma_max);

  const double reference = cfg.nonmonotone ? state.c : f_x;
  BbStepResult result;
  double tau = gamma;
  while (tau >= stop.min_step) {
    std::optional<RetractionWork> work;
    try {
      work.emplace(cayley_retraction_work(x, p, tau));
    } catch (const CayleyPoleHit&) {
      tau *= cfg.delta;
      continue;
    }
    double f_next = prob.f(work->point);
    if (std::isfinite(f_next) && f_next <= reference + cfg.beta * tau * slope) {
      result.ok = true;
      result.tau = tau;
      result.f_next = f_next;
      result.work = std::move(work);
      break;
    }
    tau *= cfg.delta;
  }

  if (result.ok) {
    double q_next = cfg.alpha * state.q + 1.0;
    state.c = (cfg.alpha * state.q * state.c + result.f_next) / q_next;
    state.q = q_next;
    state.prev_x = x;
    state.prev_grad = rgrad;
    state.has_prev = true;
    ++state.i;
  }
  return result;
}

// --- First-order solvers --------------------------------------------------------

namespace detail {

inline RunReport finish_report(std::string method, std::vector<IterationRecord> rows,
                               DenseMatrix x, double f, const ObjectiveBundle& prob,
                               TerminationReason reason, double seconds) {
  DenseMatrix rgrad = egrad_to_rgrad(x, prob.egrad(x));
  double gnorm = norm_g(x, rgrad);
  double feas = check_point(x);
  return RunReport{std::move(method),
                   std::move(rows),
                   ManifoldPoint::uncertified(std::move(x)),
                   f,
                   gnorm,
                   feas,
                   reason,
                   seconds};
}

}  // namespace detail

inline RunReport solve_rsd(const ObjectiveBundle& prob, const ManifoldPoint& x0,
                           const LineSearchConfig& ls, const StoppingRule& stop) {
  detail::WallTimer timer;
  DenseMatrix x = x0.matrix();
  double f = prob.f(x);
  BbState state;
  std::vector<IterationRecord> rows;
  TerminationReason reason = TerminationReason::MaxIter;

  for (std::size_t iter = 0; iter < stop.max_iter; ++iter) {
    MetricContext ctx(x);
    DenseMatrix rgrad = egrad_to_rgrad(x, prob.egrad(x));
    double gnorm = norm_g(ctx, rgrad);
    if (gnorm < stop.grad_tol) {
      rows.push_back({iter, f, gnorm, 0.0, 0.0, timer.seconds()});
      reason = TerminationReason::GradTol;
      break;
    }
    DenseMatrix p = -1.0 * rgrad;
    double slope = metric(ctx, rgrad, p);
    BbStepResult step = bb_linesearch(prob, x, f, rgrad, p, slope, state, ls, stop);
    if (!step.ok) {
      rows.push_back({iter, f, gnorm, 0.0, slope, timer.seconds()});
      reason = TerminationReason::StepTooSmall;
      break;
    }
    rows.push_back({iter, f, gnorm, step.tau, slope, timer.seconds()});
    x = std::move(step.work->point);
    f = step.f_next;
  }
  return detail::finish_report("rsd", std::move(rows), std::move(x), f, prob, reason,
                               timer.seconds());
}

inline RunReport solve_rcg(const ObjectiveBundle& prob, const ManifoldPoint& x0,
                           const CgConfig& cg, const LineSearchConfig& ls,
                           const StoppingRule& stop) {
  detail::WallTimer timer;
  const std::size_t mu = std::max<std::size_t>(1, cg.restart_period);
  DenseMatrix x = x0.matrix();
  double f = prob.f(x);
  BbState state;
  std::vector<IterationRecord> rows;
  TerminationReason reason = TerminationReason::MaxIter;

  MetricContext ctx(x);
  DenseMatrix rgrad = egrad_to_rgrad(x, prob.egrad(x));
  double grad_sq = metric(ctx, rgrad, rgrad);
  DenseMatrix p = -1.0 * rgrad;

  for (std::size_t iter = 0; iter < stop.max_iter; ++iter) {
    double gnorm = norm_g(ctx, rgrad);
    if (gnorm < stop.grad_tol) {
      rows.push_back({iter, f, gnorm, 0.0, 0.0, timer.seconds()});
      reason = TerminationReason::GradTol;
      break;
    }
    double slope = metric(ctx, rgrad, p);
    if (slope >= 0.0) {  // non-descent guard: fall back to steepest descent
      p = -1.0 * rgrad;
      slope = metric(ctx, rgrad, p);
    }
    BbStepResult step = bb_linesearch(prob, x, f, rgrad, p, slope, state, ls, stop);
    if (!step.ok) {
      rows.push_back({iter, f, gnorm, 0.0, slope, timer.seconds()});
      reason = TerminationReason::StepTooSmall;
      break;
    }
    rows.push_back({iter, f, gnorm, step.tau, slope, timer.seconds()});

    DenseMatrix x_next = step.work->point;
    MetricContext ctx_next(x_next);
    DenseMatrix rgrad_next = egrad_to_rgrad(x_next, prob.egrad(x_next));
    double grad_sq_next = metric(ctx_next, rgrad_next, rgrad_next);

    DenseMatrix p_next;
    if ((iter + 1) % mu == 0) {
      p_next = -1.0 * rgrad_next;  // scheduled restart, no transport involved
    } else {
      double beta_fr = grad_sq_next / grad_sq;
      double p_norm = std::sqrt(std::max(0.0, metric(ctx, p, p)));
      DenseMatrix moved =
          diff_retraction_raw(*step.work, x, omega_bar(x, p));
      double moved_norm = std::sqrt(std::max(0.0, metric(ctx_next, moved, moved)));
      if (p_norm < 1e-15 || moved_norm < 1e-15) {
        p_next = -1.0 * rgrad_next;
      } else {
        moved *= p_norm / moved_norm;  // isometric rescale
        p_next = -1.0 * rgrad_next + beta_fr * moved;
      }
    }

    x = std::move(x_next);
    f = step.f_next;
    ctx = std::move(ctx_next);
    rgrad = std::move(rgrad_next);
    grad_sq = grad_sq_next;
    p = std::move(p_next);
  }
  return detail::finish_report("rcg", std::move(rows), std::move(x), f, prob, reason,
                               timer.seconds());
}

// --- Trust region ----------------------------------------------------------------

enum class TcgStop { Converged, Boundary, NegativeCurvature, MaxInner };

struct TcgResult {
  DenseMatrix xi;
  TcgStop reason = TcgStop::Converged;
  double model_decrease = 0.0;  // m(0) - m(xi)
  bool boundary_hit = false;
  std::vector<double> iterate_norms;  // g-norms of successive iterates
};

// Truncated CG on the quadratic model m(xi) = g(grad, xi) + 1/2 g(H xi, xi)
// inside the g-ball of the given radius. Falls back to the Cauchy point if the
// recurrences ever fail to beat it. HessOp needs apply(d) -> H d.
template <class HessOp>
TcgResult tcg_subproblem(const MetricContext& ctx, const DenseMatrix& grad,
                         const HessOp& hess, double radius,
                         const TrustRegionConfig& cfg, std::size_t max_inner) {
  const std::size_t rows_n = grad.rows(), cols_n = grad.cols();
  TcgResult out;
  out.xi = DenseMatrix(rows_n, cols_n);

  double rr = metric(ctx, grad, grad);
  double r0 = std::sqrt(std::max(0.0, rr));
  if (r0 == 0.0) return out;
  const double target = r0 * std::min(cfg.tcg_kappa, std::pow(r0, cfg.tcg_theta));

  DenseMatrix r = grad;
  DenseMatrix d = -1.0 * grad;
  DenseMatrix h_xi(rows_n, cols_n);

  // Cauchy-point data from the first direction, kept for the safety net.
  double cauchy_dhd = 0.0;
  bool have_cauchy = false;
  double t_cauchy = 0.0, m_cauchy = 0.0;
  bool cauchy_on_boundary = false;

  out.reason = TcgStop::MaxInner;
  for (std::size_t j = 0; j < max_inner; ++j) {
    DenseMatrix hd = hess.apply(d);
    double dhd = metric(ctx, d, hd);
    if (j == 0) {
      cauchy_dhd = dhd;
      double t_max = radius / r0;
      if (cauchy_dhd > 0.0) {
        t_cauchy = std::min(rr / cauchy_dhd, t_max);
      } else {
        t_cauchy = t_max;
      }
      cauchy_on_boundary = (t_cauchy == t_max);
      m_cauchy = -t_cauchy * rr + 0.5 * t_cauchy * t_cauchy * cauchy_dhd;
      have_cauchy = true;
    }

    double xi_sq = metric(ctx, out.xi, out.xi);
    double xi_d = metric(ctx, out.xi, d);
    double d_sq = metric(ctx, d, d);

    if (dhd <= 0.0) {
      double tau = (-xi_d + std::sqrt(xi_d * xi_d +
                                      d_sq * (radius * radius - xi_sq))) /
                   d_sq;
      out.xi += tau * d;
      h_xi += tau * hd;
      out.reason = TcgStop::NegativeCurvature;
      out.boundary_hit = true;
      out.iterate_norms.push_back(norm_g(ctx, out.xi));
      break;
    }

    double alpha = rr / dhd;
    double next_sq = xi_sq + 2.0 * alpha * xi_d + alpha * alpha * d_sq;
    if (next_sq >= radius * radius) {
      double tau = (-xi_d + std::sqrt(xi_d * xi_d +
                                      d_sq * (radius * radius - xi_sq))) /
                   d_sq;
      out.xi += tau * d;
      h_xi += tau * hd;
      out.reason = TcgStop::Boundary;
      out.boundary_hit = true;
      out.iterate_norms.push_back(norm_g(ctx, out.xi));
      break;
    }

    out.xi += alpha * d;
    h_xi += alpha * hd;
    out.iterate_norms.push_back(norm_g(ctx, out.xi));
    r += alpha * hd;
    double rr_next = metric(ctx, r, r);
    if (std::sqrt(std::max(0.0, rr_next)) <= target) {
      out.reason = TcgStop::Converged;
      break;
    }
    d = -1.0 * r + (rr_next / rr) * d;
    rr = rr_next;
  }

  double m_xi = metric(ctx, grad, out.xi) + 0.5 * metric(ctx, h_xi, out.xi);
  if (have_cauchy && m_xi > m_cauchy + 1e-14 * (1.0 + std::fabs(m_cauchy))) {
    out.xi = -t_cauchy * grad;
    out.boundary_hit = cauchy_on_boundary;
    m_xi = m_cauchy;
  }
  out.model_decrease = -m_xi;
  return out;
}

inline RunReport solve_rtr(const ObjectiveBundle& prob, const ManifoldPoint& x0,
                           const TrustRegionConfig& cfg, HessianKind kind,
                           const StoppingRule& stop) {
  detail::WallTimer timer;
  DenseMatrix x = x0.matrix();
  double f = prob.f(x);
  const std::size_t dim = manifold_dim(x0.n(), x0.k());
  const double q_bar =
      cfg.q_bar > 0.0 ? cfg.q_bar : std::sqrt(static_cast<double>(dim));
  double q = cfg.q0 > 0.0 ? cfg.q0 : q_bar / 8.0;
  const std::size_t max_inner =
      cfg.tcg_max_inner > 0 ? cfg.tcg_max_inner : dim;

  std::vector<IterationRecord> rows;
  TerminationReason reason = TerminationReason::MaxIter;

  for (std::size_t iter = 0; iter < stop.max_iter; ++iter) {
    MetricContext ctx(x);
    HessianOperator hess(kind, x, prob);
    const DenseMatrix& rgrad = hess.rgrad();
    double gnorm = norm_g(ctx, rgrad);
    if (gnorm < stop.grad_tol) {
      rows.push_back({iter, f, gnorm, q, 0.0, timer.seconds()});
      reason = TerminationReason::GradTol;
      break;
    }
    if (q < stop.min_step) {
      rows.push_back({iter, f, gnorm, q, 0.0, timer.seconds()});
      reason = TerminationReason::StepTooSmall;
      break;
    }

    TcgResult sub = tcg_subproblem(ctx, rgrad, hess, q, cfg, max_inner);
    if (!(sub.model_decrease > 0.0)) {
      rows.push_back({iter, f, gnorm, q, 0.0, timer.seconds()});
      reason = TerminationReason::SubproblemFailure;
      break;
    }

    double rho;
    double f_hat = 0.0;
    std::optional<DenseMatrix> x_hat;
    try {
      x_hat = cayley_retraction(x, sub.xi, 1.0);
      f_hat = prob.f(*x_hat);
      rho = (f - f_hat) / std::max(sub.model_decrease, 1e-15);
      if (!std::isfinite(rho)) rho = -1.0;
    } catch (const CayleyPoleHit&) {
      rho = -1.0;  // treat the pole as a hard rejection
    }
    rows.push_back({iter, f, gnorm, q, rho, timer.seconds()});

    if (rho < 0.25) {
      q *= 0.25;
    } else if (rho > 0.75 && sub.boundary_hit) {
      q = std::min(2.0 * q, q_bar);
    }
    if (rho > cfg.rho_prime && x_hat) {
      x = std::move(*x_hat);
      f = f_hat;
    }
  }
  return detail::finish_report(kind == HessianKind::ExactMetric ? "rtr1" : "rtr2",
                               std::move(rows), std::move(x), f, prob, reason,
                               timer.seconds());
}

}  // namespace spst
