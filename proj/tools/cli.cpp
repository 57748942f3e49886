#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "invclass/bench_harness.hpp"
#include "invclass/csv.hpp"
#include "invclass/error.hpp"
#include "invclass/lambda_path.hpp"
#include "invclass/logistic.hpp"

namespace invclass::cli {

namespace {

namespace fs = std::filesystem;
using csv::format_double;

struct ModelArgs {
  std::string model_path;
  std::string biases_path;
  std::string format = "auto";
};

struct ProblemArgs {
  std::string instance_path;
  int target = -1;
};

struct SolveArgs {
  double lambda = 0.0;
  std::string solver = "newton";
  std::string line_search;
  double tol = 1e-8;
  int max_iter = 1000;
  std::string trace_path;
  std::string out_path;
};

struct PathArgs {
  double lambda_start = 1e3;
  double lambda_end = 1e-5;
  int num = 100;
  bool no_warm_start = false;
  double tol = 1e-8;
  int max_iter = 1000;
  std::string out_path;
  std::string solutions_dir;
};

struct BenchArgs {
  std::string spec_path;
  std::string out_path;
  std::string json_path;
  std::string traces_dir;
  int jobs = 1;
};

struct CompareArgs {
  double lambda = 0.0;
  double tol = 1e-8;
  int max_iter = 1000;
};

// Signals a solver that stopped without meeting the gradient tolerance.
struct NotConverged {
  std::string message;
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.model_path, "Model file (JSON, or weights CSV with --biases)")->required();
  cmd->add_option("--biases", m.biases_path, "Biases CSV when the model is a weights CSV");
  cmd->add_option("--format", m.format, "Model format")->check(CLI::IsMember({"auto", "json", "csv"}));
}

void add_problem_options(CLI::App* cmd, ProblemArgs& p) {
  cmd->add_option("--instance", p.instance_path, "Source instance (one CSV line or JSON array)")->required();
  cmd->add_option("--target-class", p.target, "Target class, 0-based row of the weight matrix")->required();
}

SoftmaxModel load_model(const ModelArgs& m) {
  std::string fmt = m.format;
  if (fmt == "auto") fmt = (fs::path(m.model_path).extension() == ".csv" || !m.biases_path.empty()) ? "csv" : "json";
  return load_model_file(m.model_path, fmt == "json" ? ModelFormat::json : ModelFormat::csv_pair, m.biases_path);
}

Problem load_problem(const SoftmaxModel& model, const ProblemArgs& p, double lambda) {
  Problem prob{load_instance_file(p.instance_path), p.target, lambda};
  if (prob.source.size() != model.feature_dim()) {
    throw InvalidArgument("instance has " + std::to_string(prob.source.size()) + " features, model expects " +
                          std::to_string(model.feature_dim()));
  }
  if (p.target < 0 || p.target >= model.class_count()) {
    throw InvalidArgument("target class " + std::to_string(p.target) + " out of range [0, " +
                          std::to_string(model.class_count()) + ")");
  }
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  return prob;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'");
  return f;
}

void write_vector(const std::string& path, const Vector& x, std::ostream& fallback) {
  if (path.empty()) {
    csv::write_row(fallback, x);
    return;
  }
  auto f = open_out(path);
  csv::write_row(f, x);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_summary(std::ostream& out, double e, double gnorm, int iterations, double p_target, double seconds) {
  out << "E=" << format_double(e) << " grad_norm=" << format_double(gnorm) << " iterations=" << iterations
      << " p_target=" << format_double(p_target) << " seconds=" << format_double(seconds) << '\n';
}

int cmd_solve(const ModelArgs& ma, const ProblemArgs& pa, const SolveArgs& sa, std::ostream& out,
              std::ostream& err) {
  const SoftmaxModel model = load_model(ma);
  const Problem prob = load_problem(model, pa, sa.lambda);
  const auto t0 = std::chrono::steady_clock::now();

  if (sa.solver == "closed-form") {
    if (model.class_count() != 2) throw InvalidArgument("closed form requires K=2");
    LogisticModel lm = to_logistic(model);
    // p_1 is row 0; flip w to target row 1.
    if (prob.target_class == 1) {
      lm.w = -lm.w;
      lm.w0 = -lm.w0;
    }
    const LogisticSolution sol = solve_logistic(lm, prob.source, prob.lambda);
    const double seconds = seconds_since(t0);
    const ReducedModel reduced = reduce(model, prob.target_class);
    const PointEval at = eval_objective(reduced, prob, sol.x_star);
    const double gnorm = gradient(reduced, prob, sol.x_star, at.p).norm();
    write_vector(sa.out_path, sol.x_star, out);
    print_summary(err, at.value, gnorm, 0, target_probability_from_value(at, prob.lambda), seconds);
    return kOk;
  }

  MethodSpec method;
  method.solver = sa.solver == "cg_pr" ? "cg" : sa.solver;
  method = parse_method(method.solver + (sa.line_search.empty() ? "" : ":" + sa.line_search));
  const ReducedModel reduced = reduce(model, prob.target_class);
  const SolverResult res = run_method(reduced, prob, prob.source, method, sa.tol, sa.max_iter);
  const double seconds = seconds_since(t0);

  if (!sa.trace_path.empty()) {
    auto f = open_out(sa.trace_path);
    write_trace_csv(f, res.trace);
  }
  write_vector(sa.out_path, res.x_star, out);
  const PointEval at = eval_objective(reduced, prob, res.x_star);
  print_summary(err, res.objective, res.grad_norm, res.iterations, target_probability_from_value(at, prob.lambda),
                seconds);
  if (!res.converged) {
    throw NotConverged{"no convergence after " + std::to_string(res.iterations) + " iterations (grad_norm=" +
                       format_double(res.grad_norm) + ")"};
  }
  return kOk;
}

int cmd_path(const ModelArgs& ma, const ProblemArgs& pa, const PathArgs& args, std::ostream& out) {
  const SoftmaxModel model = load_model(ma);
  const Problem prob = load_problem(model, pa, 1.0);
  PathConfig cfg;
  cfg.lambda_max = args.lambda_start;
  cfg.lambda_min = args.lambda_end;
  cfg.num_points = args.num;
  cfg.warm_start = !args.no_warm_start;
  cfg.solver.grad_tol = args.tol;
  cfg.solver.max_iter = args.max_iter;
  const ReducedModel reduced = reduce(model, prob.target_class);

  PathResult path;
  try {
    path = solve_path(reduced, prob.source, cfg);
  } catch (const PathFailure& f) {
    if (!args.out_path.empty()) {
      auto file = open_out(args.out_path);
      write_path_csv(file, f.partial());
    }
    throw NotConverged{f.what()};
  }
  if (args.out_path.empty()) {
    write_path_csv(out, path);
  } else {
    auto file = open_out(args.out_path);
    write_path_csv(file, path);
  }
  if (!args.solutions_dir.empty()) {
    fs::create_directories(args.solutions_dir);
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
      std::ostringstream name;
      name << "x_" << std::setw(4) << std::setfill('0') << i << ".csv";
      auto file = open_out((fs::path(args.solutions_dir) / name.str()).string());
      csv::write_row(file, path.entries[i].x_star);
    }
  }
  return kOk;
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  std::ifstream in(args.spec_path);
  if (!in) throw ParseError("cannot open '" + args.spec_path + "'");
  nlohmann::json j;
  SuiteSpec spec;
  BenchConfig cfg;
  std::string model_path;
  try {
    in >> j;
    spec.dim = j.at("D").get<int>();
    spec.classes = j.at("K").get<int>();
    spec.seed = j.value("seed", spec.seed);
    spec.count_far = j.value("count_far", spec.count_far);
    spec.count_near = j.value("count_near", spec.count_near);
    spec.lambda_far = j.value("lambda_far", spec.lambda_far);
    spec.lambda_near = j.value("lambda_near", spec.lambda_near);
    spec.weight_scale = j.value("weight_scale", spec.weight_scale);
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.grad_tol = j.value("tol", cfg.grad_tol);
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    model_path = j.value("model", std::string{});
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("suite spec: ") + e.what());
  }
  cfg.jobs = args.jobs;
  cfg.keep_solutions = false;
  cfg.keep_traces = !args.traces_dir.empty();

  const SoftmaxModel model = model_path.empty()
                                 ? generate_synthetic_model(spec.dim, spec.classes, spec.seed, spec.weight_scale)
                                 : load_model_file(model_path, ModelFormat::json);
  const auto suite = generate_problem_suite(model, spec);
  const BenchReport report = run_benchmark(model, suite, cfg);

  if (args.out_path.empty()) {
    write_report_csv(out, report);
  } else {
    auto f = open_out(args.out_path);
    write_report_csv(f, report);
  }
  if (!args.json_path.empty()) {
    auto f = open_out(args.json_path);
    write_report_json(f, report);
  }
  if (!args.traces_dir.empty()) {
    fs::create_directories(args.traces_dir);
    for (const auto& r : report.records) {
      const std::string name = "p" + std::to_string(r.problem) + "_" + r.method + "_" + r.line_search + ".csv";
      auto f = open_out((fs::path(args.traces_dir) / name).string());
      write_trace_csv(f, r.trace);
    }
  }
  for (const auto& s : report.summaries) {
    err << s.label << " median_iterations=" << s.median_iterations
        << " median_runtime_s=" << format_double(s.median_runtime) << " converged=" << s.converged << "/" << s.runs
        << '\n';
  }
  return kOk;
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << v;
  return s.str();
}

int cmd_compare(const ModelArgs& ma, const ProblemArgs& pa, const CompareArgs& args, std::ostream& out) {
  const SoftmaxModel model = load_model(ma);
  const Problem prob = load_problem(model, pa, args.lambda);
  const ReducedModel reduced = reduce(model, prob.target_class);

  const auto methods = default_methods();
  std::vector<SolverResult> results;
  std::vector<std::string> errors;
  for (const auto& m : methods) {
    try {
      results.push_back(run_method(reduced, prob, prob.source, m, args.tol, args.max_iter));
      errors.emplace_back();
    } catch (const Error& e) {
      results.emplace_back();
      errors.emplace_back(e.what());
    }
  }
  const double e_star = results.front().trace.empty() ? std::nan("") : results.front().objective;

  out << std::left << std::setw(20) << "method" << std::setw(8) << "iters" << std::setw(14) << "time_s"
      << std::setw(26) << "E" << "grad_norm\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    out << std::setw(20) << methods[m].label();
    if (!errors[m].empty()) {
      out << "failed: " << errors[m] << '\n';
      continue;
    }
    const auto& r = results[m];
    out << std::setw(8) << r.iterations << std::setw(14) << sci(r.trace.back().elapsed_seconds)
        << std::setw(26) << format_double(r.objective) << format_double(r.grad_norm) << '\n';
  }

  // E_k - E* with E* from Newton's last iterate; blank once a method has stopped.
  out << "\nE_k - E*\n" << std::setw(6) << "k";
  for (const auto& m : methods) out << std::setw(24) << m.solver;
  out << '\n';
  std::size_t longest = 0;
  for (const auto& r : results) longest = std::max(longest, r.trace.size());
  const std::size_t dense_rows = results.front().trace.size() + 2;
  for (std::size_t k = 0; k < longest; ++k) {
    const bool sparse_row = k == 25 || k == 50 || k == 100 || k == 200 || k == 500 || k + 1 == longest;
    if (k >= dense_rows && !sparse_row) continue;
    out << std::setw(6) << k;
    for (const auto& r : results) {
      if (k < r.trace.size()) {
        out << std::setw(24) << sci(r.trace[k].objective - e_star);
      } else {
        out << std::setw(24) << "";
      }
    }
    out << '\n';
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse classification for softmax and logistic-regression classifiers"};
  app.require_subcommand(1);

  ModelArgs model_args;
  ProblemArgs problem_args;

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Closest input assigned to the target class for one lambda");
  add_model_options(solve, model_args);
  add_problem_options(solve, problem_args);
  solve->add_option("--lambda", solve_args.lambda, "Trade-off between distance and class probability")->required();
  solve->add_option("--solver", solve_args.solver, "Solver")
      ->check(CLI::IsMember({"newton", "gd", "cg", "cg_pr", "lbfgs", "bfgs", "closed-form"}));
  solve->add_option("--ls", solve_args.line_search, "Line search (default depends on the solver)")
      ->check(CLI::IsMember({"backtracking", "wolfe", "constant"}));
  solve->add_option("--tol", solve_args.tol, "Gradient-norm tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "Iteration cap");
  solve->add_option("--trace", solve_args.trace_path, "Write the per-iteration trace CSV here");
  solve->add_option("--out", solve_args.out_path, "Write the solution vector here (default: stdout)");

  PathArgs path_args;
  auto* path = app.add_subcommand("path", "Solutions over a decreasing log-spaced lambda grid");
  add_model_options(path, model_args);
  add_problem_options(path, problem_args);
  path->add_option("--lambda-start", path_args.lambda_start, "Largest lambda");
  path->add_option("--lambda-end", path_args.lambda_end, "Smallest lambda");
  path->add_option("--num", path_args.num, "Number of grid points");
  path->add_flag("--no-warm-start", path_args.no_warm_start, "Start every grid point from the source instance");
  path->add_option("--tol", path_args.tol, "Gradient-norm tolerance");
  path->add_option("--max-iter", path_args.max_iter, "Iteration cap per grid point");
  path->add_option("--out", path_args.out_path, "Path CSV (default: stdout)");
  path->add_option("--solutions-dir", path_args.solutions_dir, "Write one solution CSV per grid point");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Run the multi-method benchmark on a synthetic suite");
  bench->add_option("--spec", bench_args.spec_path, "Suite spec JSON")->required();
  bench->add_option("--out", bench_args.out_path, "Report CSV (default: stdout)");
  bench->add_option("--json", bench_args.json_path, "Report JSON");
  bench->add_option("--traces-dir", bench_args.traces_dir, "Dump every run's trace CSV here");
  bench->add_option("--jobs", bench_args.jobs, "Worker threads over problems")->check(CLI::PositiveNumber);

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Run every method on one problem and tabulate E_k - E*");
  add_model_options(compare, model_args);
  add_problem_options(compare, problem_args);
  compare->add_option("--lambda", compare_args.lambda, "Trade-off parameter")->required();
  compare->add_option("--tol", compare_args.tol, "Gradient-norm tolerance");
  compare->add_option("--max-iter", compare_args.max_iter, "Iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(model_args, problem_args, solve_args, out, err);
    if (path->parsed()) return cmd_path(model_args, problem_args, path_args, out);
    if (bench->parsed()) return cmd_bench(bench_args, out, err);
    if (compare->parsed()) return cmd_compare(model_args, problem_args, compare_args, out);
  } catch (const NotConverged& nc) {
    err << "error: " << nc.message << '\n';
    return kNoConvergence;
  } catch (const LineSearchFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const NumericalBreakdown& e) {
    err << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  }
  return kUsage;
}

}  // namespace invclass::cli
