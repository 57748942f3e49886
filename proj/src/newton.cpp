#include "invclass/newton.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "invclass/csv.hpp"
#include "invclass/error.hpp"
#include "invclass/kernels.hpp"

namespace invclass {

void write_trace_csv(std::ostream& out, const std::vector<IterRecord>& trace) {
  out << "iter,E,grad_norm,step,backtracks,time_s\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << csv::format_double(r.objective) << ',' << csv::format_double(r.grad_norm) << ','
        << csv::format_double(r.step) << ',' << r.backtracks << ',' << csv::format_double(r.elapsed_seconds)
        << '\n';
  }
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(cfg.backtrack_factor > 0.0 && cfg.backtrack_factor < 1.0)) {
    throw InvalidArgument("backtracking factor must be in (0,1)");
  }
  if (cfg.max_backtracks < 1) throw InvalidArgument("max_backtracks must be positive");
}

namespace {

NewtonDirection gradient_fallback(const ReducedModel& reduced, const Problem& prob, const Vector& grad) {
  NewtonDirection out;
  const double inv_l = 1.0 / lipschitz_bound(reduced, prob);
  out.d = -inv_l * grad;
  kernels::matvec(reduced.a_bar, out.d, out.a_bar_d);
  out.fallback = true;
  return out;
}

}  // namespace

NewtonDirection newton_direction_full(const ReducedModel& reduced, const Problem& prob, const Vector& p,
                                      const Vector& grad) {
  const double lambda = prob.lambda;
  const Vector s = p.cwiseSqrt();

  Vector r;  // a_bar grad
  kernels::matvec(reduced.a_bar, grad, r);

  Matrix m = (s * s.transpose()).cwiseProduct(reduced.gram);
  m.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalBreakdown("K x K Newton system is not positive definite");

  const Vector y = llt.solve(s.cwiseProduct(r));
  const Vector t = llt.solve(s);

  NewtonDirection out;
  out.denominator = lambda * s.dot(t);
  if (!(out.denominator > kDenominatorFloor)) {
    auto fb = gradient_fallback(reduced, prob, grad);
    fb.denominator = out.denominator;
    return fb;
  }
  const double c = s.dot(y) / out.denominator;
  const Vector w = s.cwiseProduct(y / lambda - c * t);

  kernels::matvec_transpose(reduced.a_bar, w, out.d);
  out.d -= grad / lambda;
  out.a_bar_d = reduced.gram * w - r / lambda;
  return out;
}

SolverResult solve_newton(const ReducedModel& reduced, const Problem& prob, const SolverConfig& cfg) {
  return solve_newton(reduced, prob, prob.source, cfg);
}

SolverResult solve_newton(const ReducedModel& reduced, const Problem& prob, const Vector& x0,
                          const SolverConfig& cfg) {
  validate_problem(reduced, prob);
  validate(cfg);
  if (x0.size() != reduced.feature_dim() || !x0.allFinite()) throw InvalidArgument("invalid starting point");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  SolverResult res;
  Vector x = x0;
  PointEval at = eval_objective(reduced, prob, x);
  Vector grad = gradient(reduced, prob, x, at.p);
  double gnorm = grad.norm();
  res.trace.push_back({0, at.value, gnorm, 0.0, 0, elapsed()});

  int it = 0;
  while (gnorm >= cfg.grad_tol && it < cfg.max_iter) {
    NewtonDirection dir = newton_direction_full(reduced, prob, at.p, grad);
    ObjectiveLine line(prob, x, at, dir.d, dir.a_bar_d);
    if (!(line.slope_at_zero() < 0.0) && !dir.fallback) {
      dir = gradient_fallback(reduced, prob, grad);
      line = ObjectiveLine(prob, x, at, dir.d, dir.a_bar_d);
    }
    if (dir.fallback) ++res.fallback_steps;

    LineSearchResult ls;
    switch (cfg.line_search) {
      case LineSearchKind::backtracking:
        ls = backtracking_search([&](double a) { return line.delta(a); }, cfg.backtrack_factor,
                                 cfg.max_backtracks);
        break;
      case LineSearchKind::wolfe:
        ls = wolfe_search([&](double a) { return LineSample{line.delta(a), line.slope(a)}; },
                          line.slope_at_zero(), 1.0, cfg.wolfe);
        break;
      case LineSearchKind::constant:
        ls = {1.0, line.delta(1.0), 1};
        break;
    }

    x += ls.step * dir.d;
    at = eval_objective(reduced, prob, x);
    grad = gradient(reduced, prob, x, at.p);
    gnorm = grad.norm();
    ++it;
    res.trace.push_back({it, at.value, gnorm, ls.step, ls.trials, elapsed()});
  }

  res.x_star = std::move(x);
  res.objective = at.value;
  res.grad_norm = gnorm;
  res.iterations = it;
  res.converged = gnorm < cfg.grad_tol;
  return res;
}

}  // namespace invclass
