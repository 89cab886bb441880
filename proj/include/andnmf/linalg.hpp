#pragma once

#include <Eigen/Dense>

#include "andnmf/matrix.hpp"

namespace andnmf {

using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

// Thin SVD: m = left * diag(singular_values) * right^T, singular values
// sorted nonincreasing.
struct SvdFactors {
  Eigen::MatrixXd left;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right;
};

inline constexpr double kDefaultPinvTolerance = 1e-12;

SvdFactors svd(const DenseMatrix& m);

// Moore-Penrose pseudo-inverse. Singular values below rel_tol * sigma_max are
// treated as zero. Throws NumericalError if the SVD fails to converge.
DenseMatrix pseudo_inverse(const DenseMatrix& m, double rel_tol = kDefaultPinvTolerance);

// Largest singular value.
double spectral_norm(const DenseMatrix& m);

// phi_alpha: keep entries >= alpha, zero everything else (negatives included).
DenseMatrix threshold_elementwise(const DenseMatrix& v, double alpha);

// C = basis^+ * target, the minimizer of ||target - basis * C||_F.
DenseMatrix least_squares_coefficients(const DenseMatrix& basis, const DenseMatrix& target);

// Unchecked Eigen-level versions used inside the numerical modules.
namespace dense {

Eigen::VectorXd singular_values(const MatRef& m);
Eigen::MatrixXd pseudo_inverse(const MatRef& m, double rel_tol = kDefaultPinvTolerance,
                               Eigen::Index* rank = nullptr);
double spectral_norm(const MatRef& m);

// Power iteration on m^T m from the normalized all-ones vector; at most
// max_iter steps, stops once the Rayleigh quotient moves by less than
// tol (relative). Returns sqrt of the converged eigenvalue.
double power_iteration_norm(const MatRef& m, int max_iter = 1000, double tol = 1e-10);

double min_symmetric_eigenvalue(const MatRef& symmetric);
double max_symmetric_eigenvalue(const MatRef& symmetric);

}  // namespace dense

}  // namespace andnmf
