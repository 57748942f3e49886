#include "invclass/kernels.hpp"

#include <atomic>
#include <vector>

#ifdef INVCLASS_HAVE_OPENMP
#include <omp.h>
#endif

namespace invclass::kernels {

namespace {

std::atomic<std::size_t> g_threshold{std::size_t{1} << 16};

Eigen::Index chunk_count(Eigen::Index n) { return (n + kChunk - 1) / kChunk; }

// Chunked dot product of two contiguous ranges; partial sums are combined in
// chunk order so the result does not depend on scheduling.
template <typename X, typename Y>
double chunked_dot_serial(const X& x, const Y& y) {
  const Eigen::Index n = x.size();
  double total = 0.0;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    total += x.segment(start, len).dot(y.segment(start, len));
  }
  return total;
}

}  // namespace

namespace serial {

void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out) {
  out.noalias() = a * x;
  out += b;
}

void matvec(const RowMatrix& a, const Vector& x, Vector& out) { out.noalias() = a * x; }

void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out) {
  out.noalias() = a.transpose() * w;
}

Matrix gram(const RowMatrix& a) {
  Matrix g = a * a.transpose();
  // Symmetrize exactly; the product is symmetric only up to rounding.
  return 0.5 * (g + g.transpose());
}

double dot(const Vector& x, const Vector& y) { return x.dot(y); }

}  // namespace serial

namespace omp {

void matvec(const RowMatrix& a, const Vector& x, Vector& out) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  const Eigen::Index chunks = chunk_count(cols);
  std::vector<double> partial(static_cast<std::size_t>(rows * chunks), 0.0);
  const Eigen::Index tasks = rows * chunks;
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < tasks; ++t) {
    const Eigen::Index i = t / chunks;
    const Eigen::Index c = t % chunks;
    const Eigen::Index start = c * kChunk;
    const Eigen::Index len = std::min(kChunk, cols - start);
    partial[static_cast<std::size_t>(t)] =
        a.row(i).segment(start, len).dot(x.segment(start, len).transpose());
  }
  out.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < chunks; ++c) s += partial[static_cast<std::size_t>(i * chunks + c)];
    out[i] = s;
  }
}

void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out) {
  matvec(a, x, out);
  out += b;
}

void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  const Eigen::Index chunks = chunk_count(cols);
  out.setZero(cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index start = c * kChunk;
    const Eigen::Index len = std::min(kChunk, cols - start);
    auto seg = out.segment(start, len);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (w[i] != 0.0) seg += w[i] * a.row(i).segment(start, len).transpose();
    }
  }
}

Matrix gram(const RowMatrix& a) {
  const Eigen::Index k = a.rows();
  Matrix g(k, k);
  const Eigen::Index pairs = k * (k + 1) / 2;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index t = 0; t < pairs; ++t) {
    // Unrank t into (i, j) with j <= i.
    Eigen::Index i = 0;
    Eigen::Index base = 0;
    while (base + i + 1 <= t) {
      base += i + 1;
      ++i;
    }
    const Eigen::Index j = t - base;
    const double v = chunked_dot_serial(a.row(i), a.row(j));
    g(i, j) = v;
    g(j, i) = v;
  }
  return g;
}

double dot(const Vector& x, const Vector& y) {
  const Eigen::Index n = x.size();
  const Eigen::Index chunks = chunk_count(n);
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index start = c * kChunk;
    const Eigen::Index len = std::min(kChunk, n - start);
    partial[static_cast<std::size_t>(c)] = x.segment(start, len).dot(y.segment(start, len));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace omp

std::size_t parallel_threshold() { return g_threshold.load(std::memory_order_relaxed); }

void set_parallel_threshold(std::size_t work) { g_threshold.store(work, std::memory_order_relaxed); }

int max_threads() {
#ifdef INVCLASS_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {
bool go_parallel(std::size_t work) { return work >= parallel_threshold(); }
std::size_t work_of(const RowMatrix& a) {
  return static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(a.cols());
}
}  // namespace

void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out) {
  go_parallel(work_of(a)) ? omp::affine(a, b, x, out) : serial::affine(a, b, x, out);
}

void matvec(const RowMatrix& a, const Vector& x, Vector& out) {
  go_parallel(work_of(a)) ? omp::matvec(a, x, out) : serial::matvec(a, x, out);
}

void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out) {
  go_parallel(work_of(a)) ? omp::matvec_transpose(a, w, out) : serial::matvec_transpose(a, w, out);
}

Matrix gram(const RowMatrix& a) {
  return go_parallel(work_of(a) * static_cast<std::size_t>(a.rows())) ? omp::gram(a) : serial::gram(a);
}

double dot(const Vector& x, const Vector& y) {
  return go_parallel(static_cast<std::size_t>(x.size())) ? omp::dot(x, y) : serial::dot(x, y);
}

}  // namespace invclass::kernels
