#pragma once

// E(x; lambda, k) = lambda/2 ||x - x_src||^2 + g_k(x),  g_k = -ln p_k.

#include "invclass/model.hpp"
#include "invclass/types.hpp"

namespace invclass {

struct Problem {
  Vector source;
  ClassIndex target_class = 0;
  double lambda = 1.0;
};

// Throws InvalidArgument unless lambda > 0, the source is finite with the
// model's feature dimension, and the target matches the reduction.
void validate_problem(const ReducedModel& reduced, const Problem& prob);

struct PointEval {
  double value = 0.0;     // E
  double g_target = 0.0;  // g_k(x), from the shifted logits
  double dist_sq = 0.0;   // ||x - x_src||^2
  Vector logits;          // a_bar x + b_bar (entry k is 0)
  Vector p;               // softmax probabilities
};

PointEval eval_objective(const ReducedModel& reduced, const Problem& prob, const Vector& x);

// lambda (x - x_src) + a_bar^T p
Vector gradient(const ReducedModel& reduced, const Problem& prob, const Vector& x, const Vector& p);

// (lambda I + a_bar^T (diag(p) - p p^T) a_bar) u, in O(KD) without forming a D x D matrix.
Vector hessian_matvec(const ReducedModel& reduced, const Problem& prob, const Vector& p, const Vector& u);

// L = lambda + ||a_bar||^2
double lipschitz_bound(const ReducedModel& reduced, const Problem& prob);

// p_k recovered from the objective value: exp(lambda/2 ||x - x_src||^2 - E).
double target_probability_from_value(const PointEval& at, double lambda);

// The objective restricted to the ray x + alpha d.
//
// After one O(KD) product a_bar d, every trial costs O(K + 1): the quadratic
// term expands exactly in alpha, and the change of log-sum-exp is taken as
// log1p(sum_i p_i expm1(alpha c_i)) while the logit changes are moderate.
// The decrease E(x + alpha d) - E(x) is therefore resolved far below the
// rounding level of E itself, which keeps backtracking and Wolfe searches
// meaningful once the gradient is tiny.
class ObjectiveLine {
 public:
  ObjectiveLine(const ReducedModel& reduced, const Problem& prob, const Vector& x, const PointEval& at,
                const Vector& d);
  // Same, with a_bar d already known.
  ObjectiveLine(const Problem& prob, const Vector& x, const PointEval& at, const Vector& d, Vector a_bar_d);

  // E(x + alpha d) - E(x)
  double delta(double alpha) const;
  // d^T grad E(x + alpha d)
  double slope(double alpha) const;
  double slope_at_zero() const { return slope0_; }

 private:
  void init(const Problem& prob, const Vector& x, const PointEval& at, const Vector& d);

  double lambda_ = 0.0;
  double d_dot_offset_ = 0.0;  // d^T (x - x_src)
  double d_norm_sq_ = 0.0;
  double slope0_ = 0.0;
  Vector logits_;
  Vector p_;
  Vector a_bar_d_;
};

}  // namespace invclass
