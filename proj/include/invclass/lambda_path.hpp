#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "invclass/error.hpp"
#include "invclass/newton.hpp"

namespace invclass {

struct PathConfig {
  double lambda_max = 1e3;
  double lambda_min = 1e-5;
  int num_points = 100;
  bool warm_start = true;
  SolverConfig solver{};
};

void validate(const PathConfig& cfg);

// Log-spaced, strictly decreasing from lambda_max to lambda_min. A single
// point grid is {lambda_max}.
std::vector<double> lambda_grid(const PathConfig& cfg);

struct PathEntry {
  double lambda = 0.0;
  Vector x_star;
  double objective = 0.0;
  double p_target = 0.0;  // softmax at x*
  double p_target_from_value = 0.0;  // exp(lambda/2 ||x* - x_src||^2 - E)
  int iterations = 0;
  double elapsed_seconds = 0.0;
};

struct PathResult {
  std::vector<PathEntry> entries;
  double total_seconds = 0.0;
};

// Thrown when a member solve fails; carries the entries solved so far.
class PathFailure : public Error {
 public:
  PathFailure(const std::string& what, PathResult partial) : Error(what), partial_(std::move(partial)) {}
  const PathResult& partial() const { return partial_; }

 private:
  PathResult partial_;
};

// Solves from lambda_max down to lambda_min. The first point starts from the
// source instance; later points start from the previous solution when
// warm_start is set. Without warm start the grid points are independent and
// may run on several threads.
PathResult solve_path(const ReducedModel& reduced, const Vector& source, const PathConfig& cfg);

// lambda,E,p_target,iterations,time_s
void write_path_csv(std::ostream& out, const PathResult& path);

struct ConstrainedResult {
  Vector x;
  double lambda_used = 0.0;  // +inf when the source already satisfies the constraint
  double g_target = 0.0;
  int solves = 0;
};

struct ConstrainedConfig {
  double lambda_lo = 1e-12;
  double lambda_hi = 1e12;
  int max_steps = 200;
  SolverConfig solver{};
};

// min ||x - x_src||  s.t.  g_k(x) <= alpha_target, by bisection on log lambda.
// Returns x*(lambda) with g_k in [alpha_target (1 - tol), alpha_target].
// Throws Infeasible when g_k(x*(lambda_lo)) still exceeds the target or the
// step cap is reached, and MonotonicityViolation when g_k(x*(lambda)) is seen
// to decrease with lambda.
ConstrainedResult constrained_solve(const ReducedModel& reduced, const Vector& source, double alpha_target,
                                    double tol, const ConstrainedConfig& cfg = {});

}  // namespace invclass
