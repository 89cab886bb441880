#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "andnmf/errors.hpp"
#include "andnmf/linalg.hpp"
#include "test_util.hpp"

namespace andnmf {
namespace {

using testing::gaussian_matrix;
using testing::relative_frobenius;

// Largest singular value of a 2x2 matrix from the closed-form eigenvalues of M^T M.
double two_by_two_norm(const Eigen::Matrix2d& m) {
  const Eigen::Matrix2d g = m.transpose() * m;
  const double tr = g.trace(), det = g.determinant();
  return std::sqrt(tr / 2.0 + std::sqrt(tr * tr / 4.0 - det));
}

TEST(DenseMatrix, RejectsNonFiniteAndEmpty) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DenseMatrix{m}, ValidationError);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(DenseMatrix{m}, ValidationError);
  EXPECT_THROW(DenseMatrix(Eigen::MatrixXd(0, 3)), ValidationError);
  EXPECT_THROW(DenseMatrix(0, 1), ValidationError);
}

TEST(DenseMatrix, FromRowsIsRowMajorInput) {
  const auto m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 3);
  EXPECT_EQ(m(0, 2), 3.0);
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_THROW(DenseMatrix::from_rows({{1, 2}, {3}}), ValidationError);
}

TEST(PseudoInverse, Identity) {
  EXPECT_EQ(pseudo_inverse(DenseMatrix::identity(3)).values(), Eigen::MatrixXd::Identity(3, 3));
}

TEST(PseudoInverse, RankDeficientDiagonal) {
  const auto p = pseudo_inverse(DenseMatrix::diagonal({2.0, 0.0}));
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_EQ(p(1, 0), 0.0);
  EXPECT_EQ(p(1, 1), 0.0);
}

TEST(PseudoInverse, InvertibleEqualsInverse) {
  const auto p = pseudo_inverse(DenseMatrix::from_rows({{1, 1}, {0, 1}}));
  const Eigen::Matrix2d expected{{1, -1}, {0, 1}};
  EXPECT_LE((p.values() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PseudoInverse, ShapeIsTransposed) {
  const DenseMatrix m(gaussian_matrix(7, 3, 11));
  const auto p = pseudo_inverse(m);
  EXPECT_EQ(p.rows(), 3);
  EXPECT_EQ(p.cols(), 7);
}

TEST(PseudoInverse, RelativeCutoffDropsTinySingularValues) {
  const auto p = pseudo_inverse(DenseMatrix::diagonal({1.0, 1e-13}));
  EXPECT_EQ(p(1, 1), 0.0);
  const auto q = pseudo_inverse(DenseMatrix::diagonal({1.0, 1e-13}), 1e-14);
  EXPECT_NEAR(q(1, 1), 1e13, 1e-2);
}

TEST(PseudoInverse, RejectsBadTolerance) {
  EXPECT_THROW(pseudo_inverse(DenseMatrix::identity(2), 0.0), ValidationError);
  EXPECT_THROW(pseudo_inverse(DenseMatrix::identity(2), 1.0), ValidationError);
}

TEST(PseudoInverse, PenroseIdentitiesOnRandomMatrices) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Eigen::MatrixXd m = gaussian_matrix(20, 10, 100 + seed);
    if (seed % 5 == 0) m.col(9) = m.col(0) + m.col(1);  // rank 9
    const Eigen::MatrixXd p = pseudo_inverse(DenseMatrix(m)).values();
    EXPECT_LE((m * p * m - m).norm(), 1e-9 * m.norm()) << seed;
    EXPECT_LE((p * m * p - p).norm(), 1e-9 * p.norm()) << seed;
    const Eigen::MatrixXd mp = m * p, pm = p * m;
    EXPECT_LE((mp - mp.transpose()).norm(), 1e-9) << seed;
    EXPECT_LE((pm - pm.transpose()).norm(), 1e-9) << seed;
  }
}

TEST(Svd, FactorsReconstructAndAreSorted) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd m = gaussian_matrix(12, 5, 200 + seed);
    const SvdFactors f = svd(DenseMatrix(m));
    for (Index i = 0; i + 1 < f.singular_values.size(); ++i)
      EXPECT_GE(f.singular_values(i), f.singular_values(i + 1));
    EXPECT_GE(f.singular_values.minCoeff(), 0.0);
    const Eigen::MatrixXd rec = f.left * f.singular_values.asDiagonal() * f.right.transpose();
    EXPECT_LE(relative_frobenius(rec, m), 1e-9);
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(DenseMatrix::diagonal({3.0, 1.0})), 3.0, 3e-8);
  EXPECT_EQ(spectral_norm(DenseMatrix(3, 4)), 0.0);
  const auto nil = DenseMatrix::from_rows({{0, 1}, {0, 0}});
  EXPECT_NEAR(spectral_norm(nil), two_by_two_norm(nil.values()), 1e-8);
  EXPECT_NEAR(spectral_norm(nil), 1.0, 1e-8);
}

TEST(SpectralNorm, AgreesWithSvdAndPowerIteration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd m = gaussian_matrix(15, 8, 300 + seed);
    const double s = svd(DenseMatrix(m)).singular_values(0);
    EXPECT_NEAR(spectral_norm(DenseMatrix(m)), s, 1e-8 * s);
    // Power iteration on a PSD Gram matrix, as used for step sizes.
    const Eigen::MatrixXd g = m.transpose() * m;
    EXPECT_NEAR(dense::power_iteration_norm(g), s * s, 1e-6 * s * s);
  }
}

TEST(SpectralNorm, TwoByTwoOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Eigen::Matrix2d m = gaussian_matrix(2, 2, 400 + seed);
    const double expected = two_by_two_norm(m);
    EXPECT_NEAR(spectral_norm(DenseMatrix(Eigen::MatrixXd(m))), expected, 1e-8 * expected);
  }
}

TEST(Threshold, Examples) {
  const auto v = threshold_elementwise(DenseMatrix::from_rows({{0.3, 0.2, -0.1}}), 0.25);
  EXPECT_EQ(v.values(), DenseMatrix::from_rows({{0.3, 0.0, 0.0}}).values());
  const auto nonneg = DenseMatrix::from_rows({{0.0, 0.7}, {1e-300, 3.0}});
  EXPECT_EQ(threshold_elementwise(nonneg, 0.0).values(), nonneg.values());
  EXPECT_EQ(threshold_elementwise(DenseMatrix::from_rows({{0.25}}), 0.25)(0, 0), 0.25);
  EXPECT_THROW(threshold_elementwise(nonneg, -0.1), ValidationError);
}

TEST(Threshold, IdempotentAndMonotone) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const double alpha = 0.02 * static_cast<double>(seed % 10);
    const Eigen::MatrixXd v = testing::uniform_matrix(6, 9, 500 + seed);
    const Eigen::MatrixXd w = v + testing::uniform_matrix(6, 9, 600 + seed, 0.0, 0.3);
    const auto fv = threshold_elementwise(DenseMatrix(v), alpha);
    EXPECT_EQ(threshold_elementwise(fv, alpha).values(), fv.values());
    const auto fw = threshold_elementwise(DenseMatrix(w), alpha);
    EXPECT_TRUE((fv.values().array() <= fw.values().array()).all()) << seed;
  }
}

TEST(LeastSquares, Examples) {
  const DenseMatrix t(gaussian_matrix(4, 3, 7));
  EXPECT_LE((least_squares_coefficients(DenseMatrix::identity(4), t).values() - t.values()).norm(), 1e-12);

  const DenseMatrix basis(gaussian_matrix(9, 4, 8));
  EXPECT_LE((least_squares_coefficients(basis, basis).values() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-10);

  const auto b = DenseMatrix::from_rows({{1}, {1}});
  const auto target = DenseMatrix::from_rows({{0}, {2}});
  const double oracle = b.values().col(0).dot(target.values().col(0)) / b.values().col(0).squaredNorm();
  EXPECT_NEAR(least_squares_coefficients(b, target)(0, 0), oracle, 1e-14);
  EXPECT_NEAR(oracle, 1.0, 0.0);
}

TEST(LeastSquares, ResidualOrthogonalToBasis) {
  const DenseMatrix basis(gaussian_matrix(30, 6, 9));
  const DenseMatrix target(gaussian_matrix(30, 4, 10));
  const Eigen::MatrixXd c = least_squares_coefficients(basis, target).values();
  const Eigen::MatrixXd residual = target.values() - basis.values() * c;
  EXPECT_LE((basis.values().transpose() * residual).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LeastSquares, ShapeMismatch) {
  EXPECT_THROW(least_squares_coefficients(DenseMatrix(3, 2), DenseMatrix(4, 1)), ValidationError);
}

}  // namespace
}  // namespace andnmf
