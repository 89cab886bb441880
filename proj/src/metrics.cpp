#include "andnmf/metrics.hpp"

#include <cmath>
#include <sstream>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"

namespace andnmf {

namespace {

ErrorReport to_report(const std::vector<kernels::ColumnMatch>& matches) {
  ErrorReport r;
  r.per_column.reserve(matches.size());
  for (const auto& m : matches) {
    r.per_column.push_back(m.error);
    r.matched_column_indices.push_back(m.column);
    r.matched_scales.push_back(m.scale);
  }
  // Fixed left-to-right order keeps the total deterministic.
  for (double e : r.per_column) r.total += e;
  return r;
}

}  // namespace

ColumnError column_correlation_error(const Eigen::VectorXd& a_star, const DenseMatrix& a) {
  if (a_star.size() != a.rows()) {
    std::ostringstream os;
    os << "column_correlation_error: column length " << a_star.size() << " != A rows " << a.rows();
    throw ValidationError(os.str());
  }
  const auto m = kernels::parallel::correlation_matches(a_star, a.values());
  return {m[0].error, m[0].column, m[0].scale};
}

ErrorReport total_correlation_error(const DenseMatrix& a, const DenseMatrix& a_star) {
  if (a.rows() != a_star.rows()) {
    std::ostringstream os;
    os << "total_correlation_error: A has " << a.rows() << " rows, A* has " << a_star.rows();
    throw ValidationError(os.str());
  }
  return to_report(kernels::parallel::correlation_matches(a_star.values(), a.values()));
}

TruthEvaluator::TruthEvaluator(const DenseMatrix& a_star) : a_star_(a_star.values()) {
  Index rank = 0;
  pinv_ = dense::pseudo_inverse(a_star_, kDefaultPinvTolerance, &rank);
  if (rank < a_star_.cols()) {
    std::ostringstream os;
    os << "ground truth is rank deficient (rank " << rank << " < " << a_star_.cols() << " columns)";
    throw ValidationError(os.str());
  }
}

double TruthEvaluator::total_error(const Eigen::MatrixXd& a) const {
  return report(a).total;
}

ErrorReport TruthEvaluator::report(const Eigen::MatrixXd& a) const {
  if (a.rows() != a_star_.rows()) throw ValidationError("TruthEvaluator: row count mismatch");
  return to_report(kernels::parallel::correlation_matches(a_star_, a));
}

Decomposition TruthEvaluator::decompose(const Eigen::MatrixXd& a) const {
  if (a.rows() != a_star_.rows() || a.cols() != a_star_.cols())
    throw ValidationError("decompose: A and A* must have the same shape");
  const Eigen::MatrixXd c = kernels::parallel::multiply(pinv_, a);
  Decomposition out;
  out.sigma = Eigen::MatrixXd(c.diagonal().asDiagonal());
  out.e = c;
  out.e.diagonal().setZero();
  out.n = a - kernels::parallel::multiply(a_star_, c);
  out.sigma_min_diag = c.diagonal().minCoeff();
  out.e_norm = dense::spectral_norm(out.e);
  out.n_norm = dense::spectral_norm(out.n);
  return out;
}

Decomposition decompose(const DenseMatrix& a, const DenseMatrix& a_star) {
  return TruthEvaluator(a_star).decompose(a.values());
}

NoiseMoments noise_moments(const DenseMatrix& zeta) {
  const Eigen::MatrixXd& z = zeta.values();
  if (z.cols() < 2) throw ValidationError("noise_moments: need at least 2 samples");
  const Eigen::MatrixXd second = kernels::parallel::multiply_transposed(z, z) / static_cast<double>(z.cols());
  return {dense::spectral_norm(second), z.colwise().norm().maxCoeff()};
}

}  // namespace andnmf
