#pragma once

// Linear-softmax classifier parameters and the quantities derived from them
// for a fixed target class.

#include <iosfwd>
#include <string>

#include "invclass/types.hpp"

namespace invclass {

// Fixed classifier p(x) = softmax(A x + b) with A of K x D.
// Immutable after construction; the constructor validates shapes and
// finiteness.
class SoftmaxModel {
 public:
  SoftmaxModel(RowMatrix weights, Vector biases);

  int class_count() const { return static_cast<int>(weights_.rows()); }
  int feature_dim() const { return static_cast<int>(weights_.cols()); }
  const RowMatrix& weights() const { return weights_; }
  const Vector& biases() const { return biases_; }

  // z = A x + b
  Vector logits(const Vector& x) const;

 private:
  RowMatrix weights_;
  Vector biases_;
};

// Result of a softmax evaluation. neg_log_p holds g_i = -ln p_i computed
// from the shifted logits, so it stays accurate when p_i underflows.
struct SoftmaxEval {
  Vector logits;
  Vector p;
  Vector neg_log_p;
};

SoftmaxEval softmax_from_logits(const Vector& z);
SoftmaxEval softmax_eval(const SoftmaxModel& model, const Vector& x);

// log(sum_i exp(z_i)) with the maximum factored out.
double log_sum_exp(const Vector& z);

// Target-class reduced quantities:
//   a_bar = A - 1 a_k^T  (row k is zero)
//   b_bar = b - b_k 1    (entry k is zero)
//   gram  = a_bar a_bar^T
//   spec_norm_sq = ||a_bar||_2^2, the largest eigenvalue of gram
// Softmax is invariant to a common shift of the logits, so a_bar x + b_bar
// gives the same probabilities as A x + b, and g_k(x) = log_sum_exp(a_bar x + b_bar).
struct ReducedModel {
  ClassIndex target_class = 0;
  RowMatrix a_bar;
  Vector b_bar;
  Matrix gram;
  double spec_norm_sq = 0.0;

  int class_count() const { return static_cast<int>(a_bar.rows()); }
  int feature_dim() const { return static_cast<int>(a_bar.cols()); }
};

inline constexpr double kPowerIterationTol = 1e-10;
inline constexpr int kPowerIterationMaxIter = 10000;

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration. Stops once the eigen-residual ||G v - mu v|| <= tol * mu.
double largest_eigenvalue_psd(const Matrix& g, double tol = kPowerIterationTol,
                              int max_iter = kPowerIterationMaxIter);

// Throws InvalidArgument when k is not in [0, K).
ReducedModel reduce(const SoftmaxModel& model, ClassIndex k);

// Binary model with p_1(x) = 1 / (1 + exp(w^T x + w0)), p_1 the probability of
// row 0. w points away from row 0.
struct LogisticModel {
  Vector w;
  double w0 = 0.0;
};

// w = a_2 - a_1, w0 = b_2 - b_1. Requires K = 2.
LogisticModel to_logistic(const SoftmaxModel& model);

// p_1 from the logistic form, evaluated without overflow.
double logistic_p1(const LogisticModel& lm, const Vector& x);

// ---- serialization -------------------------------------------------------

enum class ModelFormat { json, csv_pair };

// JSON: {"K": int, "D": int, "biases": [K], "weights": [[D] x K]}.
SoftmaxModel load_model_json(std::istream& in);
// Weights as K lines of D comma-separated values; biases as one line of K.
SoftmaxModel load_model_csv(std::istream& weights, std::istream& biases);

// Loads from a path. For csv_pair, biases_path names the biases file.
SoftmaxModel load_model_file(const std::string& path, ModelFormat format,
                             const std::string& biases_path = {});

void save_model_json(std::ostream& out, const SoftmaxModel& model);
void save_model_csv(std::ostream& weights, std::ostream& biases, const SoftmaxModel& model);

// One line of comma-separated values or a JSON array.
Vector read_instance(std::istream& in);
Vector load_instance_file(const std::string& path);

}  // namespace invclass
