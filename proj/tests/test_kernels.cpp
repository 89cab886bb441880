#include <gtest/gtest.h>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"
#include "test_util.hpp"

namespace andnmf {
namespace {

namespace kr = kernels::reference;
namespace kp = kernels::parallel;
using testing::gaussian_matrix;

struct Shape {
  Index m, k, n;
};

class KernelAgreement : public ::testing::TestWithParam<Shape> {};

TEST_P(KernelAgreement, ProductsMatchBitwise) {
  const auto [m, k, n] = GetParam();
  Eigen::MatrixXd a = gaussian_matrix(m, k, 1), b = gaussian_matrix(k, n, 2);
  // Sparse operands exercise the zero-skipping path of the parallel kernel.
  b = kr::threshold(b, 0.5);
  EXPECT_EQ(kr::multiply(a, b), kp::multiply(a, b));

  const Eigen::MatrixXd c = gaussian_matrix(n, k, 3);
  EXPECT_EQ(kr::multiply_transposed(a, c), kp::multiply_transposed(a, c));

  const Eigen::MatrixXd d = gaussian_matrix(m, n, 4);
  EXPECT_EQ(kr::transposed_multiply(a, d), kp::transposed_multiply(a, d));
  EXPECT_EQ(kr::threshold(d, 0.1), kp::threshold(d, 0.1));
}

TEST_P(KernelAgreement, ProductsMatchEigenClosely) {
  const auto [m, k, n] = GetParam();
  const Eigen::MatrixXd a = gaussian_matrix(m, k, 5), b = gaussian_matrix(k, n, 6);
  const Eigen::MatrixXd expected = a * b;
  EXPECT_LE((kp::multiply(a, b) - expected).norm(), 1e-12 * (1.0 + expected.norm()));
  EXPECT_LE((kp::transposed_multiply(a, a) - a.transpose() * a).norm(), 1e-12 * (1.0 + a.squaredNorm()));
  EXPECT_LE((kp::multiply_transposed(b, b) - b * b.transpose()).norm(), 1e-12 * (1.0 + b.squaredNorm()));
}

TEST_P(KernelAgreement, CorrelationMatchesAgree) {
  const auto [m, k, n] = GetParam();
  const Eigen::MatrixXd truth = gaussian_matrix(m, k, 7);
  Eigen::MatrixXd est = gaussian_matrix(m, n, 8);
  est.col(0).setZero();
  const auto r = kr::correlation_matches(truth, est);
  const auto p = kp::correlation_matches(truth, est);
  ASSERT_EQ(r.size(), p.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].error, p[i].error);
    EXPECT_EQ(r[i].column, p[i].column);
    EXPECT_EQ(r[i].scale, p[i].scale);
    EXPECT_NE(r[i].column, 0);  // zero column is never a match
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelAgreement,
                         ::testing::Values(Shape{1, 1, 1}, Shape{3, 5, 2}, Shape{20, 7, 33}, Shape{64, 20, 200},
                                           Shape{200, 20, 257}));

TEST(Kernels, ThreadCountDoesNotChangeResults) {
  const Eigen::MatrixXd a = gaussian_matrix(50, 20, 9), b = gaussian_matrix(20, 300, 10);
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  const Eigen::MatrixXd one = kp::multiply(a, b);
  const Eigen::MatrixXd one_t = kp::multiply_transposed(b, b);
  kernels::set_threads(4);
  EXPECT_EQ(one, kp::multiply(a, b));
  EXPECT_EQ(one_t, kp::multiply_transposed(b, b));
  kernels::set_threads(saved);
}

TEST(Kernels, DimensionMismatch) {
  const Eigen::MatrixXd a(3, 2), b(3, 2);
  EXPECT_THROW(kp::multiply(a, b), ValidationError);
  EXPECT_THROW(kr::multiply(a, b), ValidationError);
  EXPECT_THROW(kp::multiply_transposed(a, Eigen::MatrixXd(3, 3)), ValidationError);
  EXPECT_THROW(kp::transposed_multiply(a, Eigen::MatrixXd(2, 3)), ValidationError);
}

TEST(Kernels, ThresholdKeepsBoundary) {
  Eigen::MatrixXd m(1, 4);
  m << 0.25, 0.2499999, -1.0, 3.0;
  Eigen::MatrixXd expected(1, 4);
  expected << 0.25, 0.0, 0.0, 3.0;
  EXPECT_EQ(kp::threshold(m, 0.25), expected);
  EXPECT_EQ(kr::threshold(m, 0.25), expected);
}

}  // namespace
}  // namespace andnmf
