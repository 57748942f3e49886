#pragma once

// Newton's method for E(x; lambda, k) with the Newton direction computed in
// K-dimensional space.
//
// With B = diag(p)^{1/2} a_bar, the Hessian is
//   lambda I + B^T B - v v^T,   v = a_bar^T p,
// and Woodbury's identity applied twice reduces every solve to the K x K
// system  M = diag(s) gram diag(s) + lambda I,  s = sqrt(p),  which is
// symmetric positive definite with eigenvalues >= lambda. Classes whose
// probability underflows simply drop out of M. The rank-one denominator
// 1 - v^T H^{-1} v equals lambda s^T M^{-1} s in exact arithmetic and is
// evaluated in that form.

#include "invclass/line_search.hpp"
#include "invclass/model.hpp"
#include "invclass/objective.hpp"
#include "invclass/solver_result.hpp"

namespace invclass {

struct SolverConfig {
  double grad_tol = 1e-8;
  int max_iter = 1000;
  double backtrack_factor = 0.8;
  int max_backtracks = 100;
  LineSearchKind line_search = LineSearchKind::backtracking;
  WolfeParams wolfe{};
};

// Throws InvalidArgument when a field is out of range.
void validate(const SolverConfig& cfg);

inline constexpr double kDenominatorFloor = 1e-14;

struct NewtonDirection {
  Vector d;
  Vector a_bar_d;  // a_bar d, obtained from the K x K quantities for free
  double denominator = 0.0;  // 1 - v^T H^{-1} v
  bool fallback = false;     // true when d = -grad / L was used instead
};

// Direction -(hessian)^{-1} grad at a point with probabilities p.
// Falls back to -grad / L when the denominator is <= kDenominatorFloor.
// Throws NumericalBreakdown when the K x K factorization fails.
NewtonDirection newton_direction_full(const ReducedModel& reduced, const Problem& prob, const Vector& p,
                                      const Vector& grad);

inline Vector newton_direction(const ReducedModel& reduced, const Problem& prob, const Vector& p,
                               const Vector& grad) {
  return newton_direction_full(reduced, prob, p, grad).d;
}

// Runs until ||grad|| < grad_tol or max_iter steps. Non-convergence is
// reported through SolverResult::converged; line-search failures and
// factorization breakdowns throw.
SolverResult solve_newton(const ReducedModel& reduced, const Problem& prob, const Vector& x0,
                          const SolverConfig& cfg = {});
// Starts from the source instance.
SolverResult solve_newton(const ReducedModel& reduced, const Problem& prob, const SolverConfig& cfg = {});

}  // namespace invclass
