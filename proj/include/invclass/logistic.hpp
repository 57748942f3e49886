#pragma once

// Closed-form minimizer for the two-class case.
//
// With target class 1 and p_1(x) = 1/(1 + exp(w^T x + w0)), the minimizer is
//   x* = x_src - (1/lambda)(1 - p1*) w,   p1* = phi(alpha, beta),
//   alpha = ||w||^2 / lambda,   beta = w^T x_src + w0 - alpha,
// where phi(alpha, beta) is the unique root in (0,1) of
//   h(t) = t - 1/(1 + exp(alpha t + beta)).
// To target class 2 instead, negate (w, w0).

#include "invclass/model.hpp"

namespace invclass {

struct PhiQuery {
  double alpha = 1.0;
  double beta = 0.0;
};

struct PhiResult {
  double root = 0.5;
  int iterations = 0;
  double residual = 0.0;  // h(root)
};

inline constexpr double kPhiTol = 1e-14;

// Safeguarded Newton on h over the bracket [0, 1]; any Newton step that leaves
// the current bracket is replaced by bisection. Throws InvalidArgument when
// alpha <= 0.
PhiResult phi_solve(const PhiQuery& q, double tol = kPhiTol);
inline double phi(const PhiQuery& q, double tol = kPhiTol) { return phi_solve(q, tol).root; }

struct LogisticSolution {
  Vector x_star;
  double p1_star = 0.5;
  double alpha = 0.0;
  double beta = 0.0;
};

// O(D): two inner products and one axpy. When w = 0 the gradient is
// lambda (x - x_src), so x* = x_src and p1* = 1/(1 + exp(w0)).
LogisticSolution solve_logistic(const LogisticModel& lm, const Vector& source, double lambda);

}  // namespace invclass
