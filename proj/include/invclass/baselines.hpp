#pragma once

// First-order and quasi-Newton comparison methods sharing the Newton
// solver's result and trace contract.

#include <string>

#include "invclass/line_search.hpp"
#include "invclass/model.hpp"
#include "invclass/objective.hpp"
#include "invclass/solver_result.hpp"

namespace invclass {

enum class BaselineMethod { gd, cg_pr, lbfgs, bfgs };

const char* to_string(BaselineMethod m);
// Accepts gd, cg (or cg_pr), lbfgs, bfgs.
BaselineMethod parse_baseline_method(const std::string& name);

// Line search each method uses by default: Wolfe for gd and cg_pr,
// backtracking for lbfgs and bfgs.
LineSearchKind default_line_search(BaselineMethod m);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::gd;
  LineSearchKind line_search = LineSearchKind::wolfe;
  int lbfgs_memory = 4;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  double grad_tol = 1e-8;
  int max_iter = 1000;
  double backtrack_factor = 0.8;
  int max_backtracks = 100;
  // Dense BFGS keeps a D x D inverse-Hessian approximation; larger D is refused.
  int bfgs_max_dim = 20000;
};

BaselineConfig make_baseline_config(BaselineMethod m);

void validate(const BaselineConfig& cfg);

// Polak-Ribiere CG restarts with steepest descent when beta < 0 or the
// direction is not a descent direction. L-BFGS uses the two-loop recursion;
// L-BFGS and BFGS start from the inverse-Hessian guess (1/lambda) I. The
// constant line search uses the step 1/L with L = lipschitz_bound.
SolverResult solve_baseline(const ReducedModel& reduced, const Problem& prob, const Vector& x0,
                            const BaselineConfig& cfg);
SolverResult solve_baseline(const ReducedModel& reduced, const Problem& prob, const BaselineConfig& cfg);

}  // namespace invclass
