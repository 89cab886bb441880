#pragma once

#include <initializer_list>
#include <string_view>

#include <Eigen/Dense>

namespace andnmf {

using Index = Eigen::Index;

// Dense real matrix with validated contents.
//
// Every constructor rejects empty shapes and non-finite entries, so code that
// receives a DenseMatrix can assume rows() >= 1, cols() >= 1 and all values
// finite. Storage is column-major. The object is immutable; numerical code
// works on the underlying Eigen matrix and wraps its result at the end.
class DenseMatrix {
 public:
  // Zero matrix of the given shape.
  DenseMatrix(Index rows, Index cols);
  explicit DenseMatrix(Eigen::MatrixXd values);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(Index n);
  static DenseMatrix diagonal(std::initializer_list<double> diag);

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  double operator()(Index r, Index c) const { return values_(r, c); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  operator const Eigen::MatrixXd&() const noexcept { return values_; }

  bool operator==(const DenseMatrix& other) const;

 private:
  Eigen::MatrixXd values_;
};

// Throws ValidationError naming `what` if m is empty or holds NaN/Inf.
void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, std::string_view what);

// Throws ValidationError unless a and b have identical shapes.
void require_same_shape(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b, std::string_view what);

}  // namespace andnmf
