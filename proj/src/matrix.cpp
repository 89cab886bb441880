#include "andnmf/matrix.hpp"

#include <sstream>

#include "andnmf/errors.hpp"

namespace andnmf {

DenseMatrix::DenseMatrix(Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    std::ostringstream os;
    os << "DenseMatrix: shape " << rows << "x" << cols << " is empty";
    throw ValidationError(os.str());
  }
  values_ = Eigen::MatrixXd::Zero(rows, cols);
}

DenseMatrix::DenseMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  require_finite(values_, "DenseMatrix");
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
  Eigen::MatrixXd m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) throw ValidationError("DenseMatrix::from_rows: ragged rows");
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return DenseMatrix(std::move(m));
}

DenseMatrix DenseMatrix::identity(Index n) {
  if (n < 1) throw ValidationError("DenseMatrix::identity: n must be >= 1");
  return DenseMatrix(Eigen::MatrixXd::Identity(n, n));
}

DenseMatrix DenseMatrix::diagonal(std::initializer_list<double> diag) {
  Eigen::VectorXd d(static_cast<Index>(diag.size()));
  Index i = 0;
  for (double v : diag) d(i++) = v;
  return DenseMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

bool DenseMatrix::operator==(const DenseMatrix& other) const {
  return rows() == other.rows() && cols() == other.cols() && values_ == other.values_;
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, std::string_view what) {
  if (m.rows() < 1 || m.cols() < 1) {
    std::ostringstream os;
    os << what << ": matrix is empty (" << m.rows() << "x" << m.cols() << ")";
    throw ValidationError(os.str());
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i << ", " << j << ")";
        throw ValidationError(os.str());
      }
    }
  }
}

void require_same_shape(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace andnmf
