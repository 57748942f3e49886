#include "invclass/logistic.hpp"

#include <cmath>

#include "invclass/error.hpp"
#include "invclass/kernels.hpp"

namespace invclass {

namespace {

// 1 / (1 + exp(u)) without overflow.
double upper_tail(double u) {
  if (u > 0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

constexpr double kBracketNudge = 1e-300;
constexpr int kMaxPhiIterations = 200;

}  // namespace

PhiResult phi_solve(const PhiQuery& q, double tol) {
  if (!(q.alpha > 0.0) || !std::isfinite(q.alpha)) throw InvalidArgument("phi requires alpha > 0");
  if (!std::isfinite(q.beta)) throw InvalidArgument("phi requires a finite beta");
  auto h = [&](double t) { return t - upper_tail(q.alpha * t + q.beta); };

  double lo = kBracketNudge;
  double hi = 1.0 - 0x1p-53;
  PhiResult out;
  if (h(lo) >= 0.0) return {lo, 0, h(lo)};
  if (h(hi) <= 0.0) return {hi, 0, h(hi)};

  // t = 1/(1 + exp(beta + alpha/2)) is the fixed-point map at the midpoint;
  // it lands inside the bracket and is usually close to the root.
  double t = upper_tail(q.beta + 0.5 * q.alpha);
  if (!(t > lo && t < hi)) t = 0.5;
  for (int it = 1; it <= kMaxPhiIterations; ++it) {
    const double s = upper_tail(q.alpha * t + q.beta);
    const double r = t - s;
    out = {t, it, r};
    if (std::abs(r) < tol) return out;
    if (r < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = 1.0 + q.alpha * s * (1.0 - s);
    double next = t - r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 0x1p-60) return out;
    t = next;
  }
  return out;
}

LogisticSolution solve_logistic(const LogisticModel& lm, const Vector& source, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (source.size() != lm.w.size()) throw InvalidArgument("source instance has wrong dimension");
  LogisticSolution sol;
  const double w_sq = kernels::dot(lm.w, lm.w);
  const double w_dot_src = kernels::dot(lm.w, source);
  if (w_sq == 0.0) {
    sol.x_star = source;
    sol.p1_star = upper_tail(lm.w0);
    return sol;
  }
  sol.alpha = w_sq / lambda;
  sol.beta = w_dot_src + lm.w0 - sol.alpha;
  sol.p1_star = phi({sol.alpha, sol.beta});
  // 1 - p1* = 1/(1 + exp(-(alpha p1* + beta))), exact in relative terms even
  // when p1* is within rounding of 1.
  const double one_minus = upper_tail(-(sol.alpha * sol.p1_star + sol.beta));
  sol.x_star = source - (one_minus / lambda) * lm.w;
  return sol;
}

}  // namespace invclass
