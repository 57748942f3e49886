#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "invclass/types.hpp"

namespace invclass {

// One row of a solver trace. Iteration 0 is the starting point (step 0, no
// trials); every later row follows one accepted step.
struct IterRecord {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int backtracks = 0;  // line-search trials spent on this step
  double elapsed_seconds = 0.0;
};

struct SolverResult {
  Vector x_star;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  // Number of steps where the Newton direction was replaced by a 1/L
  // gradient step because the rank-one denominator broke down.
  int fallback_steps = 0;
  std::vector<IterRecord> trace;
};

// CSV with header iter,E,grad_norm,step,backtracks,time_s.
void write_trace_csv(std::ostream& out, const std::vector<IterRecord>& trace);

}  // namespace invclass
