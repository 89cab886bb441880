#pragma once

#include <vector>

#include <Eigen/Dense>

#include "andnmf/matrix.hpp"

namespace andnmf {

struct ColumnError {
  double error = 0.0;   // epsilon_i
  Index column = -1;    // matched estimate column j*, -1 if A has no nonzero column
  double scale = 0.0;   // optimal sigma*
};

struct ErrorReport {
  std::vector<double> per_column;
  double total = 0.0;
  std::vector<Index> matched_column_indices;
  std::vector<double> matched_scales;
};

// (Sigma, E, N) with A = A* (Sigma + E) + N and N orthogonal to range(A*).
struct Decomposition {
  Eigen::MatrixXd sigma;  // diagonal D x D
  Eigen::MatrixXd e;      // off-diagonal D x D
  Eigen::MatrixXd n;      // W x D
  double sigma_min_diag = 0.0;
  double e_norm = 0.0;
  double n_norm = 0.0;
};

// min over columns j and scales s of ||a_star - s * A_j||_2, closed form.
// Zero columns of A are skipped; ties go to the smaller j.
ColumnError column_correlation_error(const Eigen::VectorXd& a_star, const DenseMatrix& a);

// Sum of column errors over every column of A*. Many ground-truth columns may
// match the same estimate column.
ErrorReport total_correlation_error(const DenseMatrix& a, const DenseMatrix& a_star);

// Throws ValidationError if A* is column-rank deficient.
Decomposition decompose(const DenseMatrix& a, const DenseMatrix& a_star);

struct NoiseMoments {
  double gamma1 = 0.0;  // ||(1/n) Zeta Zeta^T||_2
  double gamma2 = 0.0;  // max column norm
};

NoiseMoments noise_moments(const DenseMatrix& zeta);

// Precomputed ground truth for repeated evaluation inside solver loops.
class TruthEvaluator {
 public:
  explicit TruthEvaluator(const DenseMatrix& a_star);

  const Eigen::MatrixXd& a_star() const { return a_star_; }
  double total_error(const Eigen::MatrixXd& a) const;
  ErrorReport report(const Eigen::MatrixXd& a) const;
  Decomposition decompose(const Eigen::MatrixXd& a) const;

 private:
  Eigen::MatrixXd a_star_;
  Eigen::MatrixXd pinv_;
};

}  // namespace andnmf
