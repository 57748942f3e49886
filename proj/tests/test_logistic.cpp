#include <doctest.h>

#include <cmath>

#include "invclass/error.hpp"
#include "invclass/logistic.hpp"
#include "invclass/newton.hpp"
#include "oracles.hpp"

using namespace invclass;

TEST_CASE("phi at beta = -alpha/2 is one half") {
  for (double alpha : {1e-8, 0.3, 1.0, 17.0, 1e6}) CHECK(phi({alpha, -alpha / 2.0}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("phi against bisection") {
  CHECK(std::abs(phi({1.0, 0.0}) - oracle::phi_bisect(1.0, 0.0)) < 1e-12);
  CHECK(phi({1.0, 0.0}) == doctest::Approx(0.4010581).epsilon(1e-7));
  CHECK(std::abs(phi({1.0, -5.0}) - oracle::phi_bisect(1.0, -5.0)) < 1e-12);
  CHECK(phi({1.0, -5.0}) == doctest::Approx(0.98234).epsilon(1e-5));

  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 500; ++trial) {
    const double alpha = oracle::log_uniform(rng, 1e-6, 1e6);
    const double beta = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    const PhiResult r = phi_solve({alpha, beta});
    CHECK(r.root > 0.0);
    CHECK(r.root < 1.0);
    CHECK(std::abs(r.residual) < kPhiTol);
    CHECK(r.iterations <= 60);
    CHECK(std::abs(r.root - oracle::phi_bisect(alpha, beta)) < 1e-12);
  }
}

TEST_CASE("phi at extreme arguments") {
  for (double beta : {-745.0, -100.0, 100.0, 745.0}) {
    for (double alpha : {1e-12, 1.0, 1e12}) {
      const PhiResult r = phi_solve({alpha, beta});
      CHECK(r.root > 0.0);
      CHECK(r.root < 1.0);
      CHECK(std::abs(r.residual) < kPhiTol);
    }
  }
  CHECK_THROWS_AS(phi({0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(phi({-1.0, 1.0}), InvalidArgument);
}

TEST_CASE("phi decreases in beta") {
  for (double alpha : {0.1, 1.0, 10.0}) {
    double prev = 1.0;
    for (double beta = -30.0; beta <= 30.0; beta += 0.5) {
      const double t = phi({alpha, beta});
      CHECK(t < prev);
      prev = t;
    }
  }
}

TEST_CASE("closed form on the unit example") {
  LogisticModel lm{Vector::Unit(2, 0), 0.0};
  const LogisticSolution s = solve_logistic(lm, Vector::Zero(2), 1.0);
  CHECK(s.alpha == 1.0);
  CHECK(s.beta == -1.0);
  const double t = oracle::phi_bisect(1.0, -1.0);
  CHECK(std::abs(s.p1_star - t) < 1e-12);
  CHECK(s.p1_star == doctest::Approx(0.598942).epsilon(1e-6));
  CHECK(s.x_star(0) == doctest::Approx(-(1.0 - t)).epsilon(1e-12));
  CHECK(s.x_star(0) == doctest::Approx(-0.401058).epsilon(1e-6));
  CHECK(s.x_star(1) == 0.0);
  CHECK(std::abs(logistic_p1(lm, s.x_star) - s.p1_star) < 1e-12);
}

TEST_CASE("closed form with w = 0") {
  LogisticModel lm{Vector::Zero(3), 0.7};
  const Vector src = Vector::LinSpaced(3, -1.0, 1.0);
  const LogisticSolution s = solve_logistic(lm, src, 0.5);
  CHECK(s.x_star == src);
  CHECK(s.p1_star == doctest::Approx(1.0 / (1.0 + std::exp(0.7))).epsilon(1e-15));
}

TEST_CASE("closed form with huge lambda barely moves") {
  std::mt19937_64 rng(51);
  LogisticModel lm{oracle::random_vector(rng, 10, 3.0), 1.5};
  const Vector src = oracle::random_vector(rng, 10);
  const LogisticSolution s = solve_logistic(lm, src, 1e9);
  CHECK((s.x_star - src).norm() <= lm.w.norm() / 1e9);
}

TEST_CASE("closed-form properties on random problems") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = oracle::random_int(rng, 1, 200);
    const SoftmaxModel m = oracle::random_model(rng, 2, d, oracle::log_uniform(rng, 0.1, 20.0));
    const LogisticModel lm = to_logistic(m);
    const Vector src = oracle::random_vector(rng, d, 2.0);
    const double lambda = oracle::log_uniform(rng, 1e-4, 1e2);
    const LogisticSolution s = solve_logistic(lm, src, lambda);

    // The minimizer lies on the ray from the source along -w.
    const Vector step = s.x_star - src;
    const Vector across = step - step.dot(lm.w) / lm.w.squaredNorm() * lm.w;
    CHECK(across.norm() <= 1e-12 * step.norm() + 1e-15 * (1.0 + src.norm()));
    CHECK(step.dot(lm.w) <= 0.0);

    const double p_src = logistic_p1(lm, src);
    CHECK(s.p1_star >= p_src - 1e-15);
    if (p_src < 0.5) CHECK(s.p1_star > p_src);

    // Stationarity of E through the general softmax gradient.
    const Problem prob{src, 0, lambda};
    const ReducedModel r = reduce(m, 0);
    const PointEval at = eval_objective(r, prob, s.x_star);
    CHECK(gradient(r, prob, s.x_star, at.p).norm() < 1e-10 * (1.0 + lm.w.norm()));
  }
}

TEST_CASE("closed form agrees with Newton") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = oracle::random_int(rng, 1, 1000);
    const SoftmaxModel m = oracle::random_model(rng, 2, d, 3.0);
    const Problem prob{oracle::random_vector(rng, d), 0, oracle::log_uniform(rng, 1e-3, 1e1)};
    const SolverResult res = solve_newton(reduce(m, 0), prob);
    REQUIRE(res.converged);
    const LogisticSolution s = solve_logistic(to_logistic(m), prob.source, prob.lambda);
    CHECK((res.x_star - s.x_star).norm() / (1.0 + s.x_star.norm()) < 1e-7);
  }
}
