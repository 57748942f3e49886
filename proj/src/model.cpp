#include "invclass/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "invclass/csv.hpp"
#include "invclass/error.hpp"
#include "invclass/kernels.hpp"

namespace invclass {

SoftmaxModel::SoftmaxModel(RowMatrix weights, Vector biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.rows() < 2) throw InvalidArgument("a softmax model needs at least 2 classes");
  if (weights_.cols() < 1) throw InvalidArgument("feature dimension must be at least 1");
  if (biases_.size() != weights_.rows()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(weights_.rows()) + " weight rows but " +
                          std::to_string(biases_.size()) + " biases");
  }
  if (!weights_.allFinite()) throw InvalidArgument("non-finite entries in weights");
  if (!biases_.allFinite()) throw InvalidArgument("non-finite entries in biases");
}

Vector SoftmaxModel::logits(const Vector& x) const {
  if (x.size() != weights_.cols()) throw InvalidArgument("instance has wrong dimension");
  Vector z;
  kernels::affine(weights_, biases_, x, z);
  return z;
}

SoftmaxEval softmax_from_logits(const Vector& z) {
  if (!z.allFinite()) throw InvalidArgument("non-finite logits");
  Eigen::Index top = 0;
  const double m = z.maxCoeff(&top);
  SoftmaxEval out;
  out.logits = z;
  out.p = (z.array() - m).exp().matrix();
  // The top entry contributes exactly 1; summing the rest separately lets
  // log1p keep the digits of g_top when p_top is close to 1.
  const double rest = out.p.sum() - out.p[top];
  const double shift = std::log1p(rest);
  out.p /= 1.0 + rest;
  out.neg_log_p = ((m - z.array()) + shift).matrix();
  return out;
}

SoftmaxEval softmax_eval(const SoftmaxModel& model, const Vector& x) {
  if (!x.allFinite()) throw InvalidArgument("non-finite instance");
  return softmax_from_logits(model.logits(x));
}

double log_sum_exp(const Vector& z) {
  Eigen::Index top = 0;
  const double m = z.maxCoeff(&top);
  const double rest = (z.array() - m).exp().sum() - 1.0;
  return m + std::log1p(rest);
}

double largest_eigenvalue_psd(const Matrix& g, double tol, int max_iter) {
  const Eigen::Index n = g.rows();
  if (n == 0 || g.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // Fixed, irregular start vector so runs are reproducible and unlikely to be
  // orthogonal to the leading eigenvector.
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  v.normalize();
  double mu = 0.0;
  Vector gv(n);
  for (int it = 0; it < max_iter; ++it) {
    gv.noalias() = g * v;
    mu = v.dot(gv);
    const double residual = (gv - mu * v).norm();
    const double len = gv.norm();
    if (len == 0.0) return 0.0;
    if (residual <= tol * mu) break;
    v = gv / len;
  }
  return mu;
}

ReducedModel reduce(const SoftmaxModel& model, ClassIndex k) {
  if (k < 0 || k >= model.class_count()) {
    throw InvalidArgument("target class " + std::to_string(k) + " out of range [0, " +
                          std::to_string(model.class_count()) + ")");
  }
  ReducedModel r;
  r.target_class = k;
  r.a_bar = model.weights().rowwise() - model.weights().row(k);
  r.a_bar.row(k).setZero();
  r.b_bar = model.biases().array() - model.biases()[k];
  r.b_bar[k] = 0.0;
  r.gram = kernels::gram(r.a_bar);
  r.spec_norm_sq = largest_eigenvalue_psd(r.gram);
  return r;
}

LogisticModel to_logistic(const SoftmaxModel& model) {
  if (model.class_count() != 2) throw InvalidArgument("closed form requires K=2");
  LogisticModel lm;
  lm.w = (model.weights().row(1) - model.weights().row(0)).transpose();
  lm.w0 = model.biases()[1] - model.biases()[0];
  return lm;
}

double logistic_p1(const LogisticModel& lm, const Vector& x) {
  const double t = lm.w.dot(x) + lm.w0;
  if (t > 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// ---- serialization -------------------------------------------------------

SoftmaxModel load_model_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    const int k = j.at("K").get<int>();
    const int d = j.at("D").get<int>();
    const auto& jb = j.at("biases");
    const auto& jw = j.at("weights");
    if (!jb.is_array() || !jw.is_array()) throw ParseError("model JSON: biases and weights must be arrays");
    if (k < 2 || d < 1) throw InvalidArgument("model JSON: need K >= 2 and D >= 1");
    if (static_cast<int>(jb.size()) != k) {
      throw InvalidArgument("dimension mismatch: K=" + std::to_string(k) + " but " + std::to_string(jb.size()) +
                            " biases");
    }
    if (static_cast<int>(jw.size()) != k) {
      throw InvalidArgument("dimension mismatch: K=" + std::to_string(k) + " but " + std::to_string(jw.size()) +
                            " weight rows");
    }
    RowMatrix a(k, d);
    Vector b(k);
    for (int i = 0; i < k; ++i) {
      b[i] = jb[i].get<double>();
      const auto& row = jw[i];
      if (!row.is_array() || static_cast<int>(row.size()) != d) {
        throw InvalidArgument("dimension mismatch: weight row " + std::to_string(i) + " does not have D=" +
                              std::to_string(d) + " entries");
      }
      for (int c = 0; c < d; ++c) a(i, c) = row[c].get<double>();
    }
    return SoftmaxModel(std::move(a), std::move(b));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

SoftmaxModel load_model_csv(std::istream& weights, std::istream& biases) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (csv::next_line(weights, line)) rows.push_back(csv::parse_row(line));
  if (rows.empty()) throw ParseError("weights CSV is empty");
  const auto d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) throw InvalidArgument("dimension mismatch: ragged weights CSV");
  }
  if (!csv::next_line(biases, line)) throw ParseError("biases CSV is empty");
  const auto bvals = csv::parse_row(line);
  if (bvals.size() != rows.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(rows.size()) + " weight rows but " +
                          std::to_string(bvals.size()) + " biases");
  }
  RowMatrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  Vector b = Eigen::Map<const Vector>(bvals.data(), static_cast<Eigen::Index>(bvals.size()));
  return SoftmaxModel(std::move(a), std::move(b));
}

namespace {
std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}
}  // namespace

SoftmaxModel load_model_file(const std::string& path, ModelFormat format, const std::string& biases_path) {
  auto in = open_or_throw(path);
  if (format == ModelFormat::json) return load_model_json(in);
  if (biases_path.empty()) throw InvalidArgument("csv model format needs a biases file");
  auto bin = open_or_throw(biases_path);
  return load_model_csv(in, bin);
}

void save_model_json(std::ostream& out, const SoftmaxModel& model) {
  nlohmann::json j;
  j["K"] = model.class_count();
  j["D"] = model.feature_dim();
  j["biases"] = std::vector<double>(model.biases().data(), model.biases().data() + model.biases().size());
  auto rows = nlohmann::json::array();
  for (int i = 0; i < model.class_count(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(model.feature_dim()));
    for (int c = 0; c < model.feature_dim(); ++c) row[static_cast<std::size_t>(c)] = model.weights()(i, c);
    rows.push_back(std::move(row));
  }
  j["weights"] = std::move(rows);
  out << j.dump() << '\n';
}

void save_model_csv(std::ostream& weights, std::ostream& biases, const SoftmaxModel& model) {
  for (int i = 0; i < model.class_count(); ++i) csv::write_row(weights, model.weights().row(i).transpose());
  csv::write_row(biases, model.biases());
}

Vector read_instance(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("instance is empty");
  std::vector<double> vals;
  if (text[first] == '[') {
    try {
      vals = nlohmann::json::parse(text).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("instance JSON: ") + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    csv::next_line(lines, line);
    vals = csv::parse_row(line);
    if (csv::next_line(lines, line)) throw ParseError("instance CSV must be a single line");
  }
  if (vals.empty()) throw ParseError("instance is empty");
  Vector x = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  if (!x.allFinite()) throw InvalidArgument("non-finite entries in instance");
  return x;
}

Vector load_instance_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_instance(in);
}

}  // namespace invclass
