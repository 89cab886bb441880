#pragma once

// Dense kernels behind the solver hot loops.
//
// Two implementations with identical signatures:
//   reference:: straightforward serial loops, one dot product per output entry.
//   parallel::  column-parallel OpenMP loops (serial when built without OpenMP).
//
// Both accumulate every output entry over the inner index in ascending order,
// so for finite inputs the two agree exactly (compared with ==). Parallel
// results do not depend on the thread count: each output column is owned by a
// single thread and no reduction crosses threads.

#include <vector>

#include <Eigen/Dense>

namespace andnmf::kernels {

using Eigen::Index;
using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

// Best scaled match of one ground-truth column against all estimate columns.
struct ColumnMatch {
  double error = 0.0;  // min_j,s ||truth_i - s * estimate_j||_2
  Index column = -1;   // argmin j, -1 when every estimate column is zero
  double scale = 0.0;  // optimal s for that column
};

namespace reference {

Eigen::MatrixXd multiply(const MatRef& a, const MatRef& b);             // a * b
Eigen::MatrixXd multiply_transposed(const MatRef& a, const MatRef& b);  // a * b^T
Eigen::MatrixXd transposed_multiply(const MatRef& a, const MatRef& b);  // a^T * b
Eigen::MatrixXd threshold(const MatRef& m, double alpha);               // x >= alpha ? x : 0
std::vector<ColumnMatch> correlation_matches(const MatRef& truth, const MatRef& estimate);

}  // namespace reference

namespace parallel {

Eigen::MatrixXd multiply(const MatRef& a, const MatRef& b);
Eigen::MatrixXd multiply_transposed(const MatRef& a, const MatRef& b);
Eigen::MatrixXd transposed_multiply(const MatRef& a, const MatRef& b);
Eigen::MatrixXd threshold(const MatRef& m, double alpha);
std::vector<ColumnMatch> correlation_matches(const MatRef& truth, const MatRef& estimate);

}  // namespace parallel

// Threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace andnmf::kernels
