#pragma once

// Dense kernels behind every O(KD) operation of the solvers.
//
// Two implementations live side by side:
//   serial::  straightforward Eigen expressions, kept as the reference.
//   omp::     OpenMP loops over fixed-size column chunks of D.
// The dispatching functions in the top namespace pick omp:: once K*D is
// above parallel_threshold(). Chunk boundaries do not depend on the number
// of threads, so omp:: results are identical for any thread count.

#include <cstddef>

#include "invclass/types.hpp"

namespace invclass::kernels {

inline constexpr Eigen::Index kChunk = 4096;

namespace serial {
// out = A x + b
void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out);
// out = A x
void matvec(const RowMatrix& a, const Vector& x, Vector& out);
// out = A^T w
void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out);
// A A^T
Matrix gram(const RowMatrix& a);
double dot(const Vector& x, const Vector& y);
}  // namespace serial

namespace omp {
void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out);
void matvec(const RowMatrix& a, const Vector& x, Vector& out);
void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out);
Matrix gram(const RowMatrix& a);
double dot(const Vector& x, const Vector& y);
}  // namespace omp

// Work size (K*D, or D for vector ops) from which the dispatchers go parallel.
std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t work);

int max_threads();

void affine(const RowMatrix& a, const Vector& b, const Vector& x, Vector& out);
void matvec(const RowMatrix& a, const Vector& x, Vector& out);
void matvec_transpose(const RowMatrix& a, const Vector& w, Vector& out);
Matrix gram(const RowMatrix& a);
double dot(const Vector& x, const Vector& y);

}  // namespace invclass::kernels
