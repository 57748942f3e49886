#include "invclass/lambda_path.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "invclass/csv.hpp"

namespace invclass {

void validate(const PathConfig& cfg) {
  if (!(cfg.lambda_min > 0.0) || !(cfg.lambda_max > 0.0)) throw InvalidArgument("lambda bounds must be positive");
  if (cfg.num_points < 1) throw InvalidArgument("path needs at least one point");
  if (cfg.num_points > 1 && !(cfg.lambda_min < cfg.lambda_max)) {
    throw InvalidArgument("lambda_min must be below lambda_max");
  }
  validate(cfg.solver);
}

std::vector<double> lambda_grid(const PathConfig& cfg) {
  validate(cfg);
  std::vector<double> grid(static_cast<std::size_t>(cfg.num_points));
  if (cfg.num_points == 1) {
    grid[0] = cfg.lambda_max;
    return grid;
  }
  const double hi = std::log10(cfg.lambda_max);
  const double lo = std::log10(cfg.lambda_min);
  const double step = (hi - lo) / (cfg.num_points - 1);
  for (int i = 0; i < cfg.num_points; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, hi - i * step);
  grid.front() = cfg.lambda_max;
  grid.back() = cfg.lambda_min;
  return grid;
}

namespace {

using clock = std::chrono::steady_clock;

PathEntry solve_entry(const ReducedModel& reduced, const Vector& source, double lambda, const Vector& x0,
                      const SolverConfig& cfg) {
  const auto t0 = clock::now();
  const Problem prob{source, reduced.target_class, lambda};
  SolverResult res = solve_newton(reduced, prob, x0, cfg);
  if (!res.converged) {
    throw Error("no convergence at lambda=" + csv::format_double(lambda) + " after " +
                std::to_string(res.iterations) + " iterations");
  }
  PathEntry e;
  e.lambda = lambda;
  const PointEval at = eval_objective(reduced, prob, res.x_star);
  e.objective = at.value;
  e.p_target = at.p[reduced.target_class];
  e.p_target_from_value = target_probability_from_value(at, lambda);
  e.iterations = res.iterations;
  e.x_star = std::move(res.x_star);
  e.elapsed_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return e;
}

}  // namespace

PathResult solve_path(const ReducedModel& reduced, const Vector& source, const PathConfig& cfg) {
  const auto grid = lambda_grid(cfg);
  const auto t0 = clock::now();
  PathResult out;
  if (cfg.warm_start) {
    Vector x0 = source;
    for (double lambda : grid) {
      try {
        out.entries.push_back(solve_entry(reduced, source, lambda, x0, cfg.solver));
      } catch (const Error& e) {
        out.total_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        throw PathFailure(e.what(), std::move(out));
      }
      x0 = out.entries.back().x_star;
    }
  } else {
    const auto n = static_cast<long>(grid.size());
    std::vector<std::optional<PathEntry>> slots(grid.size());
    std::vector<std::string> errors(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      try {
        slots[u] = solve_entry(reduced, source, grid[u], source, cfg.solver);
      } catch (const std::exception& e) {
        errors[u] = e.what();
      }
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) {
        out.total_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        throw PathFailure(errors[i], std::move(out));
      }
      out.entries.push_back(std::move(*slots[i]));
    }
  }
  out.total_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return out;
}

void write_path_csv(std::ostream& out, const PathResult& path) {
  out << "lambda,E,p_target,iterations,time_s\n";
  for (const auto& e : path.entries) {
    out << csv::format_double(e.lambda) << ',' << csv::format_double(e.objective) << ','
        << csv::format_double(e.p_target) << ',' << e.iterations << ',' << csv::format_double(e.elapsed_seconds)
        << '\n';
  }
}

// ---- constrained form -----------------------------------------------------

namespace {

struct Probe {
  double log_lambda;
  Vector x;
  double g;
};

}  // namespace

ConstrainedResult constrained_solve(const ReducedModel& reduced, const Vector& source, double alpha_target,
                                    double tol, const ConstrainedConfig& cfg) {
  if (!(alpha_target > 0.0)) throw InvalidArgument("alpha_target must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("tol must be in (0,1)");
  if (!(cfg.lambda_lo > 0.0 && cfg.lambda_lo < cfg.lambda_hi)) throw InvalidArgument("invalid lambda bracket");

  ConstrainedResult out;
  const Problem at_source{source, reduced.target_class, 1.0};
  validate_problem(reduced, at_source);
  const double g_source = eval_objective(reduced, at_source, source).g_target;
  if (g_source <= alpha_target) {
    out.x = source;
    out.lambda_used = std::numeric_limits<double>::infinity();
    out.g_target = g_source;
    return out;
  }

  const double source_norm = source.norm();
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  auto probe = [&](double log_lambda, const Vector& x0) {
    const double lambda = std::exp(log_lambda);
    const Problem prob{source, reduced.target_class, lambda};
    // lambda (x - x_src) carries rounding of order lambda * eps * ||x||, which
    // swamps a fixed gradient tolerance at the top of the bracket.
    SolverConfig solver = cfg.solver;
    solver.grad_tol = std::max(solver.grad_tol, 16.0 * kEps * lambda * (1.0 + source_norm));
    SolverResult res = solve_newton(reduced, prob, x0, solver);
    ++out.solves;
    if (!res.converged) throw Error("constrained solve: no convergence at lambda=" + csv::format_double(lambda));
    const double g = eval_objective(reduced, prob, res.x_star).g_target;
    return Probe{log_lambda, std::move(res.x_star), g};
  };
  auto in_window = [&](double g) { return g <= alpha_target && g >= alpha_target * (1.0 - tol); };

  // hi: infeasible side (large lambda, near the source); lo: feasible side.
  Probe hi = probe(std::log(cfg.lambda_hi), source);
  if (in_window(hi.g)) {
    out.x = std::move(hi.x);
    out.lambda_used = cfg.lambda_hi;
    out.g_target = hi.g;
    return out;
  }
  if (hi.g <= alpha_target) {
    throw Infeasible("constraint already met at lambda_hi but outside the tolerance window");
  }
  Probe lo = probe(std::log(cfg.lambda_lo), hi.x);
  if (lo.g > alpha_target) {
    throw Infeasible("g_k cannot be pushed below " + csv::format_double(alpha_target) +
                     " (best reached: " + csv::format_double(lo.g) + ")");
  }
  if (lo.g > hi.g) throw MonotonicityViolation("g_k(x*(lambda)) larger at lambda_lo than at lambda_hi");

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (in_window(lo.g)) {
      out.x = std::move(lo.x);
      out.lambda_used = std::exp(lo.log_lambda);
      out.g_target = lo.g;
      return out;
    }
    const double mid = 0.5 * (lo.log_lambda + hi.log_lambda);
    const Vector& warm = (mid - lo.log_lambda < hi.log_lambda - mid) ? lo.x : hi.x;
    Probe m = probe(mid, warm);
    // Monotone in lambda up to solver accuracy.
    const double slack = 1e-12 * std::max(1.0, std::abs(m.g));
    if (m.g < lo.g - slack || m.g > hi.g + slack) {
      throw MonotonicityViolation("g_k(x*(lambda)) not monotone near lambda=" + csv::format_double(std::exp(mid)));
    }
    if (m.g <= alpha_target) {
      lo = std::move(m);
    } else {
      hi = std::move(m);
    }
  }
  throw Infeasible("bisection step cap reached before the tolerance window was hit");
}

}  // namespace invclass
