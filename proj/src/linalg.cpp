#include "andnmf/linalg.hpp"

#include <cmath>
#include <sstream>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"

namespace andnmf {

namespace {

using Svd = Eigen::JacobiSVD<Eigen::MatrixXd>;

Svd compute_svd(const MatRef& m, unsigned int options) {
  Svd s(m, options);
  if (s.info() != Eigen::Success) {
    std::ostringstream os;
    os << "SVD of " << m.rows() << "x" << m.cols() << " matrix did not converge";
    throw NumericalError(os.str());
  }
  return s;
}

void check_tolerance(double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw ValidationError("pseudo_inverse: rel_tol must lie in (0, 1)");
}

}  // namespace

namespace dense {

Eigen::VectorXd singular_values(const MatRef& m) {
  return compute_svd(m, 0).singularValues();
}

Eigen::MatrixXd pseudo_inverse(const MatRef& m, double rel_tol, Eigen::Index* rank) {
  const Svd s = compute_svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = s.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) {
      inv(i) = 1.0 / sv(i);
      ++kept;
    }
  }
  if (rank) *rank = kept;
  return s.matrixV() * inv.asDiagonal() * s.matrixU().transpose();
}

double spectral_norm(const MatRef& m) {
  const Eigen::VectorXd sv = singular_values(m);
  return sv.size() > 0 ? sv(0) : 0.0;
}

double power_iteration_norm(const MatRef& m, int max_iter, double tol) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd w = m.transpose() * (m * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double min_symmetric_eigenvalue(const MatRef& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve did not converge");
  return es.eigenvalues()(0);
}

double max_symmetric_eigenvalue(const MatRef& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve did not converge");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace dense

SvdFactors svd(const DenseMatrix& m) {
  const Svd s = compute_svd(m.values(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

DenseMatrix pseudo_inverse(const DenseMatrix& m, double rel_tol) {
  check_tolerance(rel_tol);
  return DenseMatrix(dense::pseudo_inverse(m.values(), rel_tol));
}

double spectral_norm(const DenseMatrix& m) { return dense::spectral_norm(m.values()); }

DenseMatrix threshold_elementwise(const DenseMatrix& v, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ValidationError("threshold_elementwise: alpha must be finite and >= 0");
  return DenseMatrix(kernels::parallel::threshold(v.values(), alpha));
}

DenseMatrix least_squares_coefficients(const DenseMatrix& basis, const DenseMatrix& target) {
  if (basis.rows() != target.rows()) {
    std::ostringstream os;
    os << "least_squares_coefficients: basis has " << basis.rows() << " rows, target has "
       << target.rows();
    throw ValidationError(os.str());
  }
  const Eigen::MatrixXd pinv = dense::pseudo_inverse(basis.values());
  return DenseMatrix(Eigen::MatrixXd(pinv * target.values()));
}

}  // namespace andnmf
