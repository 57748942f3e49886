#pragma once

#include <functional>
#include <string>

#include "invclass/types.hpp"

namespace invclass {

enum class LineSearchKind { backtracking, wolfe, constant };

const char* to_string(LineSearchKind kind);
// Throws InvalidArgument on unknown names.
LineSearchKind parse_line_search(const std::string& name);

struct LineSearchResult {
  double step = 0.0;
  double delta = 0.0;  // f(step) - f(0)
  int trials = 0;      // function evaluations spent
};

// Backtracking: steps 1, rho, rho^2, ... until delta_at(step) < 0.
// delta_at(alpha) returns f(x + alpha d) - f(x).
// Throws LineSearchFailure after max_backtracks rejected trials.
LineSearchResult backtracking_search(const std::function<double(double)>& delta_at, double rho,
                                     int max_backtracks);

// Same search phrased over a full-space evaluator f(x).
LineSearchResult backtracking_search(const std::function<double(const Vector&)>& objective, const Vector& x,
                                     const Vector& d, double f_x, double rho, int max_backtracks);

struct LineSample {
  double delta = 0.0;  // f(alpha) - f(0)
  double slope = 0.0;  // d/dalpha f(alpha)
};

struct WolfeParams {
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_evals = 60;
  double max_step = 1e10;
};

// Strong Wolfe line search: bracketing phase followed by zoom, trial steps
// from safeguarded cubic interpolation. Steps longer than alpha_init are
// allowed. slope0 must be negative.
// Throws LineSearchFailure when the evaluation budget is exhausted or the
// bracket collapses.
LineSearchResult wolfe_search(const std::function<LineSample(double)>& line, double slope0, double alpha_init,
                              const WolfeParams& params = {});

// True when alpha satisfies both strong Wolfe inequalities.
bool satisfies_strong_wolfe(const LineSample& at, double alpha, double slope0, double c1, double c2);

}  // namespace invclass
