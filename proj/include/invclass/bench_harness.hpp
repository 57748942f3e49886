#pragma once

// Synthetic problem suites and the multi-method benchmark.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "invclass/baselines.hpp"
#include "invclass/newton.hpp"

namespace invclass {

struct SuiteSpec {
  int dim = 784;
  int classes = 10;
  std::uint64_t seed = 1;
  int count_far = 40;
  int count_near = 10;
  double lambda_far = 0.01;
  double lambda_near = 0.1;
  double weight_scale = 3.0;
};

void validate(const SuiteSpec& spec);

// A_ij, b_i ~ N(0,1) * weight_scale / sqrt(D), deterministic in seed.
SoftmaxModel generate_synthetic_model(int dim, int classes, std::uint64_t seed, double weight_scale);

enum class ProblemKind { far, near };

struct SuiteProblem {
  Problem problem;
  ProblemKind kind = ProblemKind::far;
};

// count_far problems targeting the least probable class at the source, then
// count_near problems targeting the second most probable class. Sources are
// standard normal vectors drawn from a per-problem seed.
std::vector<SuiteProblem> generate_problem_suite(const SoftmaxModel& model, const SuiteSpec& spec);

// A solver plus its line search.
struct MethodSpec {
  std::string solver = "newton";  // newton, gd, cg, lbfgs, bfgs
  LineSearchKind line_search = LineSearchKind::backtracking;

  std::string label() const;
};

// Each method with the line search it performs best with.
std::vector<MethodSpec> default_methods();
// "newton", "gd:wolfe", "cg", ... ; a bare name gets the method's default search.
MethodSpec parse_method(const std::string& text);

// Single dispatch point over Newton and the baselines.
SolverResult run_method(const ReducedModel& reduced, const Problem& prob, const Vector& x0, const MethodSpec& method,
                        double grad_tol = 1e-8, int max_iter = 1000);

struct BenchConfig {
  std::vector<MethodSpec> methods = default_methods();
  double grad_tol = 1e-8;
  int max_iter = 1000;
  int repetitions = 3;  // runtime is the median over repetitions
  int jobs = 1;
  bool keep_solutions = true;
  bool keep_traces = false;
};

inline constexpr int kHistogramBins = 12;  // trials 1..11, and 12+ in the last bin

struct BenchRecord {
  int problem = 0;
  ProblemKind kind = ProblemKind::far;
  double lambda = 0.0;
  ClassIndex target_class = 0;
  std::string method;
  std::string line_search;
  int iterations = 0;
  double runtime_seconds = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string error;  // empty when the solve ran to completion
  double p_target = 0.0;
  double p_target_from_value = 0.0;
  std::vector<int> backtrack_histogram = std::vector<int>(kHistogramBins, 0);
  // E_k - E* along the trace, with E* the final Newton objective.
  std::vector<double> objective_gap;
  Vector x_star;
  std::vector<IterRecord> trace;
};

struct MethodSummary {
  std::string label;
  double median_iterations = 0.0;
  double mean_iterations = 0.0;
  double median_runtime = 0.0;
  double total_runtime = 0.0;
  int converged = 0;
  int runs = 0;
};

struct BenchReport {
  std::vector<BenchRecord> records;  // problem-major, methods in config order
  std::vector<MethodSummary> summaries;
  double reduce_seconds = 0.0;  // one-time target-class reductions, excluded from runtimes
};

// Runs every (problem, method) pair from the source instance. Failures are
// recorded per record and never abort the sweep. The first method named
// "newton" (if any) provides E*; otherwise Newton is run once more for it.
BenchReport run_benchmark(const SoftmaxModel& model, const std::vector<SuiteProblem>& suite, const BenchConfig& cfg);

// problem,kind,lambda,target,method,line_search,iterations,runtime_s,E,grad_norm,converged,error
void write_report_csv(std::ostream& out, const BenchReport& report);
void write_report_json(std::ostream& out, const BenchReport& report);

// Late-iteration check of superlinear convergence: for consecutive gaps
// e_k, e_{k+1} with e_k in (lo, hi), log10(e_{k+1}) <= ratio * log10(e_k)
// must hold (e_{k+1} <= 0 counts as passing). A trace with no pair in range
// passes only if it reaches lo.
bool digits_grow(const std::vector<double>& gaps, double ratio = 1.5, double lo = 1e-12, double hi = 1e-2);

std::string to_string(ProblemKind kind);

}  // namespace invclass
