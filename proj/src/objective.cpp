#include "invclass/objective.hpp"

#include <cmath>
#include <string>

#include "invclass/error.hpp"
#include "invclass/kernels.hpp"

namespace invclass {

void validate_problem(const ReducedModel& reduced, const Problem& prob) {
  if (!(prob.lambda > 0.0) || !std::isfinite(prob.lambda)) throw InvalidArgument("lambda must be positive and finite");
  if (prob.source.size() != reduced.feature_dim()) {
    throw InvalidArgument("source instance has dimension " + std::to_string(prob.source.size()) + ", model has D=" +
                          std::to_string(reduced.feature_dim()));
  }
  if (!prob.source.allFinite()) throw InvalidArgument("non-finite entries in source instance");
  if (prob.target_class != reduced.target_class) {
    throw InvalidArgument("problem target class does not match the reduced model");
  }
}

PointEval eval_objective(const ReducedModel& reduced, const Problem& prob, const Vector& x) {
  if (x.size() != reduced.feature_dim()) throw InvalidArgument("point has wrong dimension");
  if (!x.allFinite()) throw InvalidArgument("non-finite point");
  PointEval out;
  kernels::affine(reduced.a_bar, reduced.b_bar, x, out.logits);
  auto sm = softmax_from_logits(out.logits);
  out.p = std::move(sm.p);
  out.g_target = sm.neg_log_p[reduced.target_class];
  const Vector offset = x - prob.source;
  out.dist_sq = kernels::dot(offset, offset);
  out.value = 0.5 * prob.lambda * out.dist_sq + out.g_target;
  return out;
}

Vector gradient(const ReducedModel& reduced, const Problem& prob, const Vector& x, const Vector& p) {
  Vector g;
  kernels::matvec_transpose(reduced.a_bar, p, g);
  g += prob.lambda * (x - prob.source);
  return g;
}

Vector hessian_matvec(const ReducedModel& reduced, const Problem& prob, const Vector& p, const Vector& u) {
  Vector r;
  kernels::matvec(reduced.a_bar, u, r);
  const double pr = p.dot(r);
  const Vector w = (p.array() * (r.array() - pr)).matrix();
  Vector out;
  kernels::matvec_transpose(reduced.a_bar, w, out);
  out += prob.lambda * u;
  return out;
}

double lipschitz_bound(const ReducedModel& reduced, const Problem& prob) { return prob.lambda + reduced.spec_norm_sq; }

double target_probability_from_value(const PointEval& at, double lambda) {
  return std::exp(0.5 * lambda * at.dist_sq - at.value);
}

// ---- ObjectiveLine --------------------------------------------------------

ObjectiveLine::ObjectiveLine(const ReducedModel& reduced, const Problem& prob, const Vector& x, const PointEval& at,
                             const Vector& d) {
  kernels::matvec(reduced.a_bar, d, a_bar_d_);
  init(prob, x, at, d);
}

ObjectiveLine::ObjectiveLine(const Problem& prob, const Vector& x, const PointEval& at, const Vector& d,
                             Vector a_bar_d)
    : a_bar_d_(std::move(a_bar_d)) {
  init(prob, x, at, d);
}

void ObjectiveLine::init(const Problem& prob, const Vector& x, const PointEval& at, const Vector& d) {
  lambda_ = prob.lambda;
  d_dot_offset_ = kernels::dot(d, x - prob.source);
  d_norm_sq_ = kernels::dot(d, d);
  logits_ = at.logits;
  p_ = at.p;
  slope0_ = lambda_ * d_dot_offset_ + a_bar_d_.dot(p_);
}

namespace {
// Logit moves up to this size use the expm1/log1p form.
constexpr double kSmallMove = 30.0;
}  // namespace

double ObjectiveLine::delta(double alpha) const {
  const double quad = lambda_ * alpha * (d_dot_offset_ + 0.5 * alpha * d_norm_sq_);
  const Vector moves = alpha * a_bar_d_;
  if (moves.cwiseAbs().maxCoeff() <= kSmallMove) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < moves.size(); ++i) s += p_[i] * std::expm1(moves[i]);
    return quad + std::log1p(s);
  }
  const Vector shifted = logits_ + moves;
  return quad + (log_sum_exp(shifted) - log_sum_exp(logits_));
}

double ObjectiveLine::slope(double alpha) const {
  const Vector shifted = logits_ + alpha * a_bar_d_;
  const Vector p = softmax_from_logits(shifted).p;
  return lambda_ * (d_dot_offset_ + alpha * d_norm_sq_) + a_bar_d_.dot(p);
}

}  // namespace invclass
