#include "invclass/bench_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "invclass/csv.hpp"
#include "invclass/error.hpp"

namespace invclass {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(ProblemKind kind) { return kind == ProblemKind::far ? "far" : "near"; }

void validate(const SuiteSpec& spec) {
  if (spec.dim < 1 || spec.classes < 2) throw InvalidArgument("suite needs D >= 1 and K >= 2");
  if (spec.count_far < 0 || spec.count_near < 0) throw InvalidArgument("problem counts must be non-negative");
  if (!(spec.lambda_far > 0.0) || !(spec.lambda_near > 0.0)) throw InvalidArgument("suite lambdas must be positive");
  if (!(spec.weight_scale >= 0.0)) throw InvalidArgument("weight_scale must be non-negative");
}

SoftmaxModel generate_synthetic_model(int dim, int classes, std::uint64_t seed, double weight_scale) {
  if (dim < 1 || classes < 2) throw InvalidArgument("synthetic model needs D >= 1 and K >= 2");
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = weight_scale / std::sqrt(static_cast<double>(dim));
  RowMatrix a(classes, dim);
  Vector b(classes);
  for (int i = 0; i < classes; ++i) {
    for (int c = 0; c < dim; ++c) a(i, c) = scale * normal(rng);
  }
  for (int i = 0; i < classes; ++i) b[i] = scale * normal(rng);
  return SoftmaxModel(std::move(a), std::move(b));
}

std::vector<SuiteProblem> generate_problem_suite(const SoftmaxModel& model, const SuiteSpec& spec) {
  validate(spec);
  if (model.feature_dim() != spec.dim || model.class_count() != spec.classes) {
    throw InvalidArgument("suite spec dimensions do not match the model");
  }
  std::vector<SuiteProblem> out;
  const int total = spec.count_far + spec.count_near;
  for (int i = 0; i < total; ++i) {
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector src(spec.dim);
    for (int c = 0; c < spec.dim; ++c) src[c] = normal(rng);
    const Vector p = softmax_eval(model, src).p;

    SuiteProblem sp;
    sp.problem.source = std::move(src);
    if (i < spec.count_far) {
      sp.kind = ProblemKind::far;
      Eigen::Index k = 0;
      p.minCoeff(&k);
      sp.problem.target_class = static_cast<ClassIndex>(k);
      sp.problem.lambda = spec.lambda_far;
    } else {
      sp.kind = ProblemKind::near;
      std::vector<int> order(static_cast<std::size_t>(p.size()));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
      sp.problem.target_class = order[1];
      sp.problem.lambda = spec.lambda_near;
    }
    out.push_back(std::move(sp));
  }
  return out;
}

// ---- methods ----------------------------------------------------------------

std::string MethodSpec::label() const { return solver + ":" + to_string(line_search); }

std::vector<MethodSpec> default_methods() {
  return {{"newton", LineSearchKind::backtracking},
          {"gd", LineSearchKind::wolfe},
          {"cg", LineSearchKind::wolfe},
          {"lbfgs", LineSearchKind::backtracking},
          {"bfgs", LineSearchKind::backtracking}};
}

MethodSpec parse_method(const std::string& text) {
  const auto colon = text.find(':');
  MethodSpec m;
  m.solver = text.substr(0, colon);
  if (m.solver == "cg_pr") m.solver = "cg";
  if (m.solver == "newton") {
    m.line_search = LineSearchKind::backtracking;
  } else {
    m.line_search = default_line_search(parse_baseline_method(m.solver));
  }
  if (colon != std::string::npos) m.line_search = parse_line_search(text.substr(colon + 1));
  return m;
}

SolverResult run_method(const ReducedModel& reduced, const Problem& prob, const Vector& x0, const MethodSpec& method,
                        double grad_tol, int max_iter) {
  if (method.solver == "newton") {
    SolverConfig cfg;
    cfg.grad_tol = grad_tol;
    cfg.max_iter = max_iter;
    cfg.line_search = method.line_search;
    return solve_newton(reduced, prob, x0, cfg);
  }
  BaselineConfig cfg = make_baseline_config(parse_baseline_method(method.solver));
  cfg.line_search = method.line_search;
  cfg.grad_tol = grad_tol;
  cfg.max_iter = max_iter;
  return solve_baseline(reduced, prob, x0, cfg);
}

// ---- benchmark ------------------------------------------------------------

bool digits_grow(const std::vector<double>& gaps, double ratio, double lo, double hi) {
  bool any_pair = false;
  bool reached = false;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] <= lo) reached = true;
    if (i + 1 == gaps.size()) break;
    const double e = gaps[i];
    if (!(e > lo && e < hi)) continue;
    any_pair = true;
    const double next = gaps[i + 1];
    if (next <= 0.0) continue;
    if (std::log10(next) > ratio * std::log10(e)) return false;
  }
  return any_pair || reached;
}

namespace {

BenchRecord run_cell(const ReducedModel& reduced, const SuiteProblem& sp, int index, const MethodSpec& method,
                     const BenchConfig& cfg) {
  BenchRecord rec;
  rec.problem = index;
  rec.kind = sp.kind;
  rec.lambda = sp.problem.lambda;
  rec.target_class = sp.problem.target_class;
  rec.method = method.solver;
  rec.line_search = to_string(method.line_search);
  try {
    std::vector<double> times;
    SolverResult res;
    for (int rep = 0; rep < std::max(1, cfg.repetitions); ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      res = run_method(reduced, sp.problem, sp.problem.source, method, cfg.grad_tol, cfg.max_iter);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    rec.runtime_seconds = median(times);
    rec.iterations = res.iterations;
    rec.objective = res.objective;
    rec.grad_norm = res.grad_norm;
    rec.converged = res.converged;
    const PointEval at = eval_objective(reduced, sp.problem, res.x_star);
    rec.p_target = at.p[sp.problem.target_class];
    rec.p_target_from_value = target_probability_from_value(at, sp.problem.lambda);
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      const int bin = std::min(res.trace[i].backtracks, kHistogramBins) - 1;
      if (bin >= 0) ++rec.backtrack_histogram[static_cast<std::size_t>(bin)];
    }
    if (cfg.keep_solutions) rec.x_star = std::move(res.x_star);
    rec.trace = std::move(res.trace);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

BenchReport run_benchmark(const SoftmaxModel& model, const std::vector<SuiteProblem>& suite, const BenchConfig& cfg) {
  if (cfg.methods.empty()) throw InvalidArgument("no methods to benchmark");
  BenchReport report;

  const auto t0 = std::chrono::steady_clock::now();
  std::map<ClassIndex, ReducedModel> reduced;
  for (const auto& sp : suite) {
    if (!reduced.count(sp.problem.target_class)) {
      reduced.emplace(sp.problem.target_class, reduce(model, sp.problem.target_class));
    }
  }
  report.reduce_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto n_methods = cfg.methods.size();
  const auto newton_it = std::find_if(cfg.methods.begin(), cfg.methods.end(),
                                      [](const MethodSpec& m) { return m.solver == "newton"; });
  report.records.resize(suite.size() * n_methods);
  std::vector<double> reference(suite.size(), std::nan(""));

  const long n_problems = static_cast<long>(suite.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, cfg.jobs))
  for (long pi = 0; pi < n_problems; ++pi) {
    const auto p = static_cast<std::size_t>(pi);
    const auto& red = reduced.at(suite[p].problem.target_class);
    for (std::size_t m = 0; m < n_methods; ++m) {
      report.records[p * n_methods + m] = run_cell(red, suite[p], static_cast<int>(p), cfg.methods[m], cfg);
    }
    if (newton_it != cfg.methods.end()) {
      const auto& rec = report.records[p * n_methods + static_cast<std::size_t>(newton_it - cfg.methods.begin())];
      if (rec.error.empty()) reference[p] = rec.objective;
    } else {
      try {
        reference[p] = solve_newton(red, suite[p].problem).objective;
      } catch (const std::exception&) {
      }
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      auto& rec = report.records[p * n_methods + m];
      for (const auto& r : rec.trace) rec.objective_gap.push_back(r.objective - reference[p]);
      if (!cfg.keep_traces) rec.trace.clear();
    }
  }

  for (const auto& method : cfg.methods) {
    MethodSummary s;
    s.label = method.label();
    std::vector<double> its;
    std::vector<double> times;
    for (const auto& rec : report.records) {
      if (rec.method != method.solver || rec.line_search != to_string(method.line_search)) continue;
      ++s.runs;
      if (!rec.error.empty()) continue;
      if (rec.converged) ++s.converged;
      its.push_back(rec.iterations);
      times.push_back(rec.runtime_seconds);
    }
    s.median_iterations = median(its);
    s.mean_iterations = its.empty() ? 0.0 : std::accumulate(its.begin(), its.end(), 0.0) / its.size();
    s.median_runtime = median(times);
    s.total_runtime = std::accumulate(times.begin(), times.end(), 0.0);
    report.summaries.push_back(s);
  }
  return report;
}

void write_report_csv(std::ostream& out, const BenchReport& report) {
  out << "problem,kind,lambda,target,method,line_search,iterations,runtime_s,E,grad_norm,converged,error\n";
  for (const auto& r : report.records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << r.problem << ',' << to_string(r.kind) << ',' << csv::format_double(r.lambda) << ',' << r.target_class
        << ',' << r.method << ',' << r.line_search << ',' << r.iterations << ','
        << csv::format_double(r.runtime_seconds) << ',' << csv::format_double(r.objective) << ','
        << csv::format_double(r.grad_norm) << ',' << (r.converged ? 1 : 0) << ',' << err << '\n';
  }
}

void write_report_json(std::ostream& out, const BenchReport& report) {
  nlohmann::json j;
  auto recs = nlohmann::json::array();
  for (const auto& r : report.records) {
    recs.push_back({{"problem", r.problem},
                    {"kind", to_string(r.kind)},
                    {"lambda", r.lambda},
                    {"target", r.target_class},
                    {"method", r.method},
                    {"line_search", r.line_search},
                    {"iterations", r.iterations},
                    {"runtime_s", r.runtime_seconds},
                    {"E", r.objective},
                    {"grad_norm", r.grad_norm},
                    {"converged", r.converged},
                    {"error", r.error},
                    {"p_target", r.p_target},
                    {"backtrack_histogram", r.backtrack_histogram},
                    {"objective_gap", r.objective_gap}});
  }
  j["records"] = std::move(recs);
  auto sums = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    sums.push_back({{"method", s.label},
                    {"median_iterations", s.median_iterations},
                    {"mean_iterations", s.mean_iterations},
                    {"median_runtime_s", s.median_runtime},
                    {"total_runtime_s", s.total_runtime},
                    {"converged", s.converged},
                    {"runs", s.runs}});
  }
  j["summaries"] = std::move(sums);
  j["reduce_seconds"] = report.reduce_seconds;
  out << j.dump(2) << '\n';
}

}  // namespace invclass
