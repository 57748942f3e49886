#include "invclass/baselines.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <memory>

#include "invclass/error.hpp"
#include "invclass/kernels.hpp"

namespace invclass {

const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::gd: return "gd";
    case BaselineMethod::cg_pr: return "cg";
    case BaselineMethod::lbfgs: return "lbfgs";
    case BaselineMethod::bfgs: return "bfgs";
  }
  return "?";
}

BaselineMethod parse_baseline_method(const std::string& name) {
  if (name == "gd") return BaselineMethod::gd;
  if (name == "cg" || name == "cg_pr") return BaselineMethod::cg_pr;
  if (name == "lbfgs") return BaselineMethod::lbfgs;
  if (name == "bfgs") return BaselineMethod::bfgs;
  throw InvalidArgument("unknown method '" + name + "'");
}

LineSearchKind default_line_search(BaselineMethod m) {
  return (m == BaselineMethod::gd || m == BaselineMethod::cg_pr) ? LineSearchKind::wolfe
                                                                 : LineSearchKind::backtracking;
}

BaselineConfig make_baseline_config(BaselineMethod m) {
  BaselineConfig cfg;
  cfg.method = m;
  cfg.line_search = default_line_search(m);
  return cfg;
}

void validate(const BaselineConfig& cfg) {
  if (!(cfg.wolfe_c1 > 0.0 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1.0)) {
    throw InvalidArgument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (!(cfg.grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(cfg.backtrack_factor > 0.0 && cfg.backtrack_factor < 1.0)) {
    throw InvalidArgument("backtracking factor must be in (0,1)");
  }
  if (cfg.max_backtracks < 1) throw InvalidArgument("max_backtracks must be positive");
  if (cfg.lbfgs_memory < 1) throw InvalidArgument("L-BFGS memory must be positive");
}

namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

// Two-loop recursion: returns H grad for the implicit L-BFGS inverse Hessian.
Vector lbfgs_apply(const std::deque<CurvaturePair>& mem, const Vector& grad, double initial_scale) {
  Vector q = grad;
  std::vector<double> a(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    a[i] = mem[i].rho * mem[i].s.dot(q);
    q -= a[i] * mem[i].y;
  }
  double gamma = initial_scale;
  if (!mem.empty()) gamma = mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
  Vector r = gamma * q;
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double b = mem[i].rho * mem[i].y.dot(r);
    r += (a[i] - b) * mem[i].s;
  }
  return r;
}

}  // namespace

SolverResult solve_baseline(const ReducedModel& reduced, const Problem& prob, const BaselineConfig& cfg) {
  return solve_baseline(reduced, prob, prob.source, cfg);
}

SolverResult solve_baseline(const ReducedModel& reduced, const Problem& prob, const Vector& x0,
                            const BaselineConfig& cfg) {
  validate_problem(reduced, prob);
  validate(cfg);
  const Eigen::Index dim = reduced.feature_dim();
  if (x0.size() != dim || !x0.allFinite()) throw InvalidArgument("invalid starting point");
  if (cfg.method == BaselineMethod::bfgs && dim > cfg.bfgs_max_dim) {
    throw InvalidArgument("dense BFGS refused for D=" + std::to_string(dim) + " (needs a D x D matrix)");
  }

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  const double inv_lambda = 1.0 / prob.lambda;
  const double constant_step = 1.0 / lipschitz_bound(reduced, prob);
  const WolfeParams wolfe{cfg.wolfe_c1, cfg.wolfe_c2, 60, 1e10};

  SolverResult res;
  Vector x = x0;
  PointEval at = eval_objective(reduced, prob, x);
  Vector grad = gradient(reduced, prob, x, at.p);
  double gnorm = grad.norm();
  res.trace.push_back({0, at.value, gnorm, 0.0, 0, elapsed()});

  Vector prev_grad;
  Vector prev_dir;
  double prev_step = 1.0;
  double prev_slope = 0.0;
  std::deque<CurvaturePair> memory;
  Matrix inv_hessian;
  if (cfg.method == BaselineMethod::bfgs) inv_hessian = Matrix::Identity(dim, dim) * inv_lambda;

  int it = 0;
  while (gnorm >= cfg.grad_tol && it < cfg.max_iter) {
    Vector d;
    switch (cfg.method) {
      case BaselineMethod::gd:
        d = -grad;
        break;
      case BaselineMethod::cg_pr: {
        if (it == 0) {
          d = -grad;
        } else {
          const double beta = grad.dot(grad - prev_grad) / prev_grad.squaredNorm();
          d = beta > 0.0 ? Vector(-grad + beta * prev_dir) : Vector(-grad);
        }
        break;
      }
      case BaselineMethod::lbfgs:
        d = -lbfgs_apply(memory, grad, inv_lambda);
        break;
      case BaselineMethod::bfgs:
        d.noalias() = -(inv_hessian.selfadjointView<Eigen::Lower>() * grad);
        break;
    }

    auto line = std::make_unique<ObjectiveLine>(reduced, prob, x, at, d);
    if (!(line->slope_at_zero() < 0.0)) {
      // Restart from steepest descent.
      d = -grad;
      memory.clear();
      if (cfg.method == BaselineMethod::bfgs) inv_hessian = Matrix::Identity(dim, dim) * inv_lambda;
      line = std::make_unique<ObjectiveLine>(reduced, prob, x, at, d);
    }
    const double slope0 = line->slope_at_zero();

    LineSearchResult ls;
    switch (cfg.line_search) {
      case LineSearchKind::backtracking:
        ls = backtracking_search([&](double a) { return line->delta(a); }, cfg.backtrack_factor,
                                 cfg.max_backtracks);
        break;
      case LineSearchKind::wolfe: {
        double init = 1.0;
        if ((cfg.method == BaselineMethod::gd || cfg.method == BaselineMethod::cg_pr) && it > 0) {
          init = prev_step * prev_slope / slope0;
          if (!std::isfinite(init) || init <= 0.0) init = 1.0;
        }
        ls = wolfe_search([&](double a) { return LineSample{line->delta(a), line->slope(a)}; }, slope0, init, wolfe);
        break;
      }
      case LineSearchKind::constant:
        ls = {constant_step, line->delta(constant_step), 1};
        break;
    }

    const Vector step_vec = ls.step * d;
    x += step_vec;
    prev_grad = grad;
    prev_dir = d;
    prev_step = ls.step;
    prev_slope = slope0;
    at = eval_objective(reduced, prob, x);
    grad = gradient(reduced, prob, x, at.p);
    gnorm = grad.norm();
    ++it;
    res.trace.push_back({it, at.value, gnorm, ls.step, ls.trials, elapsed()});

    if (cfg.method == BaselineMethod::lbfgs || cfg.method == BaselineMethod::bfgs) {
      const Vector y = grad - prev_grad;
      const double ys = y.dot(step_vec);
      // Strong convexity gives y^T s >= lambda ||s||^2; skip pairs ruined by rounding.
      if (ys > 1e-12 * y.norm() * step_vec.norm()) {
        const double rho = 1.0 / ys;
        if (cfg.method == BaselineMethod::lbfgs) {
          memory.push_back({step_vec, y, rho});
          if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) memory.pop_front();
        } else {
          // Only the lower triangle is kept up to date.
          const Vector hy = inv_hessian.selfadjointView<Eigen::Lower>() * y;
          const double yhy = y.dot(hy);
          inv_hessian.selfadjointView<Eigen::Lower>().rankUpdate(hy, step_vec, -rho);
          inv_hessian.selfadjointView<Eigen::Lower>().rankUpdate(step_vec, rho * rho * yhy + rho);
        }
      }
    }
  }

  res.x_star = std::move(x);
  res.objective = at.value;
  res.grad_norm = gnorm;
  res.iterations = it;
  res.converged = gnorm < cfg.grad_tol;
  return res;
}

}  // namespace invclass
