#include "invclass/line_search.hpp"

#include <algorithm>
#include <cmath>

#include "invclass/error.hpp"

namespace invclass {

const char* to_string(LineSearchKind kind) {
  switch (kind) {
    case LineSearchKind::backtracking: return "backtracking";
    case LineSearchKind::wolfe: return "wolfe";
    case LineSearchKind::constant: return "constant";
  }
  return "?";
}

LineSearchKind parse_line_search(const std::string& name) {
  if (name == "backtracking") return LineSearchKind::backtracking;
  if (name == "wolfe") return LineSearchKind::wolfe;
  if (name == "constant") return LineSearchKind::constant;
  throw InvalidArgument("unknown line search '" + name + "'");
}

LineSearchResult backtracking_search(const std::function<double(double)>& delta_at, double rho,
                                     int max_backtracks) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("backtracking factor must be in (0,1)");
  double alpha = 1.0;
  for (int trial = 1; trial <= max_backtracks; ++trial) {
    const double delta = delta_at(alpha);
    if (delta < 0.0) return {alpha, delta, trial};
    alpha *= rho;
  }
  throw LineSearchFailure("backtracking found no decrease in " + std::to_string(max_backtracks) + " trials");
}

LineSearchResult backtracking_search(const std::function<double(const Vector&)>& objective, const Vector& x,
                                     const Vector& d, double f_x, double rho, int max_backtracks) {
  return backtracking_search([&](double alpha) { return objective(x + alpha * d) - f_x; }, rho, max_backtracks);
}

bool satisfies_strong_wolfe(const LineSample& at, double alpha, double slope0, double c1, double c2) {
  return at.delta <= c1 * alpha * slope0 && std::abs(at.slope) <= c2 * std::abs(slope0);
}

namespace {

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb); NaN if
// the cubic has no real minimizer.
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (!(disc >= 0.0)) return std::nan("");
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0) return std::nan("");
  return b - (b - a) * (gb + d2 - d1) / denom;
}

struct Point {
  double alpha;
  double f;
  double g;
};

}  // namespace

LineSearchResult wolfe_search(const std::function<LineSample(double)>& line, double slope0, double alpha_init,
                              const WolfeParams& params) {
  if (!(slope0 < 0.0)) throw LineSearchFailure("Wolfe search needs a descent direction");
  if (!(params.c1 > 0.0 && params.c1 < params.c2 && params.c2 < 1.0)) {
    throw InvalidArgument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  const double c1 = params.c1;
  const double c2 = params.c2;
  int evals = 0;
  auto sample = [&](double alpha) {
    ++evals;
    const LineSample s = line(alpha);
    return Point{alpha, s.delta, s.slope};
  };
  auto sufficient = [&](const Point& p) { return p.f <= c1 * p.alpha * slope0; };
  auto curvature = [&](const Point& p) { return std::abs(p.g) <= c2 * std::abs(slope0); };

  // lo satisfies sufficient decrease and has the lowest f seen in the bracket;
  // the minimizer of interest lies between lo and hi.
  auto zoom = [&](Point lo, Point hi) -> LineSearchResult {
    while (evals < params.max_evals) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (width <= 1e-16 * std::max(1.0, right)) break;
      double trial = cubic_minimizer(lo.alpha, lo.f, lo.g, hi.alpha, hi.f, hi.g);
      if (!std::isfinite(trial) || trial < left + 0.1 * width || trial > right - 0.1 * width) {
        trial = 0.5 * (left + right);
      }
      const Point p = sample(trial);
      if (!std::isfinite(p.f) || !sufficient(p) || p.f >= lo.f) {
        hi = p;
      } else {
        if (curvature(p)) return {p.alpha, p.f, evals};
        if (p.g * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = p;
      }
    }
    throw LineSearchFailure("Wolfe zoom did not converge");
  };

  Point prev{0.0, 0.0, slope0};
  double alpha = alpha_init > 0.0 ? alpha_init : 1.0;
  while (evals < params.max_evals) {
    const Point cur = sample(alpha);
    if (!std::isfinite(cur.f) || !sufficient(cur) || (evals > 1 && cur.f >= prev.f)) return zoom(prev, cur);
    if (curvature(cur)) return {cur.alpha, cur.f, evals};
    if (cur.g >= 0.0) return zoom(cur, prev);
    if (cur.alpha >= params.max_step) break;
    double next = cubic_minimizer(prev.alpha, prev.f, prev.g, cur.alpha, cur.f, cur.g);
    if (!std::isfinite(next) || next < 1.5 * cur.alpha) next = 4.0 * cur.alpha;
    next = std::min({next, 10.0 * cur.alpha, params.max_step});
    prev = cur;
    alpha = next;
  }
  throw LineSearchFailure("Wolfe search exceeded its evaluation budget");
}

}  // namespace invclass
