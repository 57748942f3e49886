#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "invclass/error.hpp"
#include "invclass/newton.hpp"
#include "invclass/objective.hpp"
#include "oracles.hpp"

using namespace invclass;

namespace {

struct Instance {
  SoftmaxModel model;
  ReducedModel reduced;
  Problem prob;
};

Instance random_instance(std::mt19937_64& rng, int k, int d, double lambda, double scale = 3.0) {
  SoftmaxModel m = oracle::random_model(rng, k, d, scale);
  Problem prob{oracle::random_vector(rng, d), oracle::random_int(rng, 0, k - 1), lambda};
  ReducedModel r = reduce(m, prob.target_class);
  return {std::move(m), std::move(r), std::move(prob)};
}

Matrix assembled_hessian(const ReducedModel& r, const Problem& prob, const Vector& p) {
  const int d = r.feature_dim();
  Matrix h(d, d);
  for (int j = 0; j < d; ++j) h.col(j) = hessian_matvec(r, prob, p, Vector::Unit(d, j));
  return h;
}

}  // namespace

TEST_CASE("objective at the source is g_k") {
  std::mt19937_64 rng(10);
  Instance in = random_instance(rng, 4, 6, 0.3);
  const PointEval at = eval_objective(in.reduced, in.prob, in.prob.source);
  CHECK(at.value == doctest::Approx(softmax_eval(in.model, in.prob.source).neg_log_p(in.prob.target_class)));
  CHECK(at.dist_sq == 0.0);
}

TEST_CASE("objective of the zero model") {
  const SoftmaxModel m(RowMatrix::Zero(2, 3), Vector::Zero(2));
  const Problem prob{Vector::Constant(3, 1.0), 1, 0.7};
  const ReducedModel r = reduce(m, 1);
  const Vector x = Vector::LinSpaced(3, -1.0, 2.0);
  const PointEval at = eval_objective(r, prob, x);
  CHECK(at.value == doctest::Approx(0.35 * (x - prob.source).squaredNorm() + std::log(2.0)).epsilon(1e-15));
  CHECK(gradient(r, prob, x, at.p).isApprox(0.7 * (x - prob.source), 1e-15));
  const Vector u = Vector::LinSpaced(3, 0.5, -4.0);
  CHECK(hessian_matvec(r, prob, at.p, u).isApprox(0.7 * u, 1e-15));
  CHECK(lipschitz_bound(r, prob) == 0.7);
}

TEST_CASE("objective matches a direct evaluation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Instance in = random_instance(rng, 3, 2, oracle::log_uniform(rng, 1e-3, 1e2));
    const Vector x = oracle::random_vector(rng, 2, 2.0);
    const double want = oracle::objective(oracle::dense_of(in.model), in.prob.source, in.prob.target_class,
                                          in.prob.lambda, x);
    CHECK(std::abs(eval_objective(in.reduced, in.prob, x).value - want) <= 1e-14 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("objective rejects non-finite points and bad problems") {
  std::mt19937_64 rng(12);
  Instance in = random_instance(rng, 3, 4, 1.0);
  CHECK_THROWS_AS(eval_objective(in.reduced, in.prob, Vector::Constant(4, INFINITY)), InvalidArgument);
  Problem bad = in.prob;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(validate_problem(in.reduced, bad), InvalidArgument);
  bad = in.prob;
  bad.source = Vector::Zero(5);
  CHECK_THROWS_AS(validate_problem(in.reduced, bad), InvalidArgument);
  bad = in.prob;
  bad.target_class = (in.prob.target_class + 1) % 3;
  CHECK_THROWS_AS(validate_problem(in.reduced, bad), InvalidArgument);
}

TEST_CASE("gradient and Hessian-vector products against finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = oracle::random_int(rng, 2, 10);
    const int d = oracle::random_int(rng, 1, 50);
    Instance in = random_instance(rng, k, d, oracle::log_uniform(rng, 1e-2, 1e1));
    const auto dense = oracle::dense_of(in.model);
    const Vector x = in.prob.source + oracle::random_vector(rng, d, 0.5);
    const PointEval at = eval_objective(in.reduced, in.prob, x);

    auto e = [&](const Vector& y) { return oracle::objective(dense, in.prob.source, in.prob.target_class, in.prob.lambda, y); };
    CHECK(oracle::rel_err(gradient(in.reduced, in.prob, x, at.p), oracle::fd_gradient(e, x)) < 1e-5);

    auto g = [&](const Vector& y) { return oracle::gradient(dense, in.prob.source, in.prob.target_class, in.prob.lambda, y); };
    const Vector u = oracle::random_vector(rng, d);
    CHECK(oracle::rel_err(hessian_matvec(in.reduced, in.prob, at.p, u), oracle::fd_directional(g, x, u)) < 1e-5);
  }
}

TEST_CASE("Hessian-vector product matches dense assembly and is symmetric") {
  std::mt19937_64 rng(14);
  Instance in = random_instance(rng, 3, 5, 0.2);
  const Vector x = oracle::random_vector(rng, 5);
  const PointEval at = eval_objective(in.reduced, in.prob, x);
  const Matrix want = oracle::hessian(oracle::dense_of(in.model), in.prob.target_class, in.prob.lambda, x);
  CHECK((assembled_hessian(in.reduced, in.prob, at.p) - want).norm() < 1e-12 * want.norm());

  for (int trial = 0; trial < 20; ++trial) {
    const Vector u = oracle::random_vector(rng, 5);
    const Vector v = oracle::random_vector(rng, 5);
    const double uhv = u.dot(hessian_matvec(in.reduced, in.prob, at.p, v));
    const double vhu = v.dot(hessian_matvec(in.reduced, in.prob, at.p, u));
    CHECK(std::abs(uhv - vhu) < 1e-10);
  }
}

TEST_CASE("Lipschitz bound") {
  RowMatrix a(2, 2);
  a << 0.0, 0.0, 1.0, 0.0;
  const ReducedModel r = reduce(SoftmaxModel(a, Vector::Zero(2)), 0);
  CHECK(lipschitz_bound(r, Problem{Vector::Zero(2), 0, 1.0}) == doctest::Approx(2.0).epsilon(1e-12));

  std::mt19937_64 rng(15);
  Instance in = random_instance(rng, 6, 12, 0.05);
  const double l = lipschitz_bound(in.reduced, in.prob);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = oracle::random_vector(rng, 12, 3.0);
    const Matrix h = oracle::hessian(oracle::dense_of(in.model), in.prob.target_class, in.prob.lambda, x);
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().maxCoeff();
    CHECK(top <= l * (1.0 + 1e-10));
  }
}

TEST_CASE("strong convexity inequality") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = oracle::random_int(rng, 2, 8);
    const int d = oracle::random_int(rng, 1, 20);
    Instance in = random_instance(rng, k, d, oracle::log_uniform(rng, 1e-3, 1e1));
    const Vector x = oracle::random_vector(rng, d, 3.0);
    const Vector y = oracle::random_vector(rng, d, 3.0);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double lhs = eval_objective(in.reduced, in.prob, t * x + (1.0 - t) * y).value;
    const double rhs = t * eval_objective(in.reduced, in.prob, x).value +
                       (1.0 - t) * eval_objective(in.reduced, in.prob, y).value -
                       0.5 * in.prob.lambda * t * (1.0 - t) * (x - y).squaredNorm();
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("Hessian spectrum") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = oracle::random_int(rng, 2, 10);
    const int d = oracle::random_int(rng, k, 50);
    Instance in = random_instance(rng, k, d, oracle::log_uniform(rng, 1e-2, 1e1));
    const Vector x = oracle::random_vector(rng, d, 2.0);
    const PointEval at = eval_objective(in.reduced, in.prob, x);
    Matrix h = assembled_hessian(in.reduced, in.prob, at.p);
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (h + h.transpose())).eigenvalues();
    const double lambda = in.prob.lambda;
    const double norm_sq = oracle::spectral_norm_sq(oracle::reduced_rows(oracle::dense_of(in.model), in.prob.target_class));
    CHECK(ev.minCoeff() >= lambda - 1e-9);
    CHECK(ev.maxCoeff() <= lambda + norm_sq + 1e-9);
    CHECK(((ev.array() - lambda).abs() <= 1e-9).count() >= d - k + 1);
  }
}

TEST_CASE("Hessian is nearly lambda I for very large lambda") {
  std::mt19937_64 rng(18);
  Instance in = random_instance(rng, 5, 15, 1.0);
  in.prob.lambda = 1e6 * in.reduced.spec_norm_sq;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = oracle::random_vector(rng, 15, 3.0);
    const PointEval at = eval_objective(in.reduced, in.prob, x);
    Matrix h = assembled_hessian(in.reduced, in.prob, at.p);
    h.diagonal().array() -= in.prob.lambda;
    CHECK(h.norm() / in.prob.lambda < 1e-5);
  }
}

TEST_CASE("loss curvature at the minimizer shrinks with 1 - p_k") {
  std::mt19937_64 rng(19);
  Instance in = random_instance(rng, 4, 10, 1.0);
  const double row_max = in.reduced.a_bar.rowwise().squaredNorm().maxCoeff();
  double prev = 1.0;
  for (double scale : {1e-2, 1e-4, 1e-6}) {
    in.prob.lambda = scale * in.reduced.spec_norm_sq;
    const SolverResult res = solve_newton(in.reduced, in.prob);
    REQUIRE(res.converged);
    const PointEval at = eval_objective(in.reduced, in.prob, res.x_star);
    Matrix h = assembled_hessian(in.reduced, in.prob, at.p);
    h.diagonal().array() -= in.prob.lambda;
    const double miss = 1.0 - at.p[in.prob.target_class];
    // trace(A_bar^T (diag p - p p^T) A_bar) <= (1 - p_k) max_j ||a_bar_j||^2
    CHECK(h.eigenvalues().real().maxCoeff() <= miss * row_max * (1.0 + 1e-9));
    CHECK(miss < prev);
    prev = miss;
  }
}

TEST_CASE("ObjectiveLine agrees with direct evaluation") {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = oracle::random_int(rng, 2, 8);
    const int d = oracle::random_int(rng, 1, 30);
    Instance in = random_instance(rng, k, d, oracle::log_uniform(rng, 1e-2, 1e1));
    const Vector x = oracle::random_vector(rng, d);
    const Vector dir = oracle::random_vector(rng, d);
    const PointEval at = eval_objective(in.reduced, in.prob, x);
    const ObjectiveLine line(in.reduced, in.prob, x, at, dir);
    CHECK(line.slope_at_zero() == doctest::Approx(gradient(in.reduced, in.prob, x, at.p).dot(dir)).epsilon(1e-12));
    for (double alpha : {1e-6, 0.01, 0.3, 1.0, 7.0, 200.0}) {
      const Vector y = x + alpha * dir;
      const PointEval ay = eval_objective(in.reduced, in.prob, y);
      const double scale = std::max({1.0, std::abs(at.value), std::abs(ay.value)});
      CHECK(std::abs(line.delta(alpha) - (ay.value - at.value)) < 1e-13 * scale);
      CHECK(line.slope(alpha) ==
            doctest::Approx(gradient(in.reduced, in.prob, y, ay.p).dot(dir)).epsilon(1e-9).scale(scale));
    }
  }
}

TEST_CASE("ObjectiveLine resolves decreases below the rounding level of E") {
  // A quadratic in disguise: zero model, so delta is exact in closed form.
  const SoftmaxModel m(RowMatrix::Zero(3, 2), Vector::Zero(3));
  const Problem prob{Vector::Zero(2), 0, 1.0};
  const ReducedModel r = reduce(m, 0);
  Vector x(2);
  x << 1e-9, 0.0;
  const PointEval at = eval_objective(r, prob, x);
  const Vector d = -x;
  const ObjectiveLine line(r, prob, x, at, d);
  CHECK(line.delta(1.0) == doctest::Approx(-0.5e-18).epsilon(1e-12));
}
