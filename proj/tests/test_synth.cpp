#include <cmath>

#include <gtest/gtest.h>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"
#include "andnmf/synth.hpp"

namespace andnmf {
namespace {

TEST(GroundTruth, SignedRange) {
  const auto gt = generate_ground_truth(200, 20, GroundTruthKind::kSigned, 1);
  EXPECT_GE(gt.a_star.values().minCoeff(), -0.5);
  EXPECT_LT(gt.a_star.values().maxCoeff(), 0.5);
  EXPECT_LT(gt.a_star.values().minCoeff(), -0.45);
  EXPECT_EQ(gt.provenance, GroundTruthKind::kSigned);
  EXPECT_EQ(to_string(gt.provenance), "random-uniform-signed");
}

TEST(GroundTruth, NonnegativeRange) {
  const auto gt = generate_ground_truth(200, 20, GroundTruthKind::kNonnegative, 2);
  EXPECT_GE(gt.a_star.values().minCoeff(), 0.0);
  EXPECT_LT(gt.a_star.values().maxCoeff(), 1.0);
  EXPECT_EQ(to_string(gt.provenance), "random-uniform-nonneg");
}

TEST(GroundTruth, FullColumnRank) {
  const auto gt = generate_ground_truth(200, 20, GroundTruthKind::kNonnegative, 3);
  const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(gt.a_star.values()).singularValues();
  EXPECT_EQ((s.array() > 1e-10 * s(0)).count(), 20);
  EXPECT_NEAR(gt.condition_number, s(0) / s(19), 1e-8 * gt.condition_number);
}

TEST(GroundTruth, RejectsWideShapes) {
  EXPECT_THROW(generate_ground_truth(10, 20, GroundTruthKind::kSigned, 0), ValidationError);
}

TEST(GroundTruth, LoadedRejectsZeroColumns) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(4, 2);
  m.col(1).setZero();
  EXPECT_THROW(make_ground_truth(DenseMatrix(m), GroundTruthKind::kLoaded), ValidationError);
  EXPECT_NO_THROW(make_ground_truth(DenseMatrix(Eigen::MatrixXd::Ones(4, 1)), GroundTruthKind::kLoaded));
}

TEST(Dataset, NoiselessIsExactProduct) {
  const auto gt = generate_ground_truth(50, 8, GroundTruthKind::kNonnegative, 4);
  const auto data = generate_dataset(gt, WeightSpec::dirichlet(8, 0.3, 5), NoiseSpec{0.0, 6}, 400);
  EXPECT_TRUE((data.zeta.values().array() == 0.0).all());
  EXPECT_EQ(data.y.values(), kernels::reference::multiply(gt.a_star.values(), data.x.values()));
  EXPECT_EQ((data.y.values() - gt.a_star.values() * data.x.values()).norm() < 1e-12, true);
}

TEST(Dataset, NoisyIsProductPlusNoise) {
  const auto gt = generate_ground_truth(50, 8, GroundTruthKind::kNonnegative, 7);
  const auto data = generate_dataset(gt, WeightSpec::dirichlet(8, 0.3, 8), NoiseSpec{0.1, 9}, 300);
  const Eigen::MatrixXd clean = kernels::reference::multiply(gt.a_star.values(), data.x.values());
  EXPECT_EQ(data.y.values(), clean + data.zeta.values());
}

TEST(Dataset, NoiseColumnNormIsGamma) {
  const double gamma = 0.04;
  const auto gt = generate_ground_truth(200, 20, GroundTruthKind::kNonnegative, 10);
  const auto data = generate_dataset(gt, WeightSpec::dirichlet(20, 0.25, 11), NoiseSpec{gamma, 12}, 5000);
  const double mean_norm = data.zeta.values().colwise().norm().mean();
  EXPECT_NEAR(mean_norm, gamma, 0.05 * gamma);
  EXPECT_DOUBLE_EQ((NoiseSpec{gamma, 0}.gamma1(200)), gamma * gamma / 200.0);
}

TEST(Dataset, BinaryColumnsAreSumsOfSupportColumns) {
  const auto gt = generate_ground_truth(30, 10, GroundTruthKind::kSigned, 13);
  const auto data = generate_dataset(gt, WeightSpec::sparse_binary(10, 3, 14), NoiseSpec{}, 200);
  for (Index j = 0; j < 200; ++j) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(30);
    int count = 0;
    for (Index i = 0; i < 10; ++i)
      if (data.x(i, j) == 1.0) {
        sum += gt.a_star.values().col(i);
        ++count;
      }
    EXPECT_EQ(count, 3);
    EXPECT_LE((data.y.values().col(j) - sum).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Dataset, DirichletDataLiesInColumnSpace) {
  const auto gt = generate_ground_truth(200, 20, GroundTruthKind::kNonnegative, 15);
  const auto data = generate_dataset(gt, WeightSpec::dirichlet(20, 0.25, 16), NoiseSpec{}, 2000);
  for (Index j = 0; j < data.x.cols(); ++j) EXPECT_NEAR(data.x.values().col(j).sum(), 1.0, 1e-12);
  const auto c = least_squares_coefficients(gt.a_star, data.y);
  const Eigen::MatrixXd residual = data.y.values() - gt.a_star.values() * c.values();
  EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Dataset, BitwiseReproducible) {
  const auto gt = generate_ground_truth(40, 6, GroundTruthKind::kSigned, 17);
  const auto spec = WeightSpec::logistic_normal(6, 0.5, 18);
  const auto a = generate_dataset(gt, spec, NoiseSpec{0.02, 19}, 500);
  const auto b = generate_dataset(gt, spec, NoiseSpec{0.02, 19}, 500);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.zeta, b.zeta);
  EXPECT_EQ(generate_ground_truth(40, 6, GroundTruthKind::kSigned, 17).a_star, gt.a_star);
}

TEST(Dataset, DimensionMismatch) {
  const auto gt = generate_ground_truth(40, 6, GroundTruthKind::kSigned, 20);
  EXPECT_THROW(generate_dataset(gt, WeightSpec::dirichlet(5, 0.3, 0), NoiseSpec{}, 10), ValidationError);
  EXPECT_THROW(generate_dataset(gt, WeightSpec::dirichlet(6, 0.3, 0), NoiseSpec{-1.0, 0}, 10), ValidationError);
}

TEST(Initialization, ZeroLevelsReturnGroundTruth) {
  const auto gt = generate_ground_truth(30, 5, GroundTruthKind::kNonnegative, 21);
  const auto init = generate_initialization(gt, InitSpec{0.0, 0.0, false, 22});
  EXPECT_EQ(init.a0, gt.a_star);
  EXPECT_EQ(init.ell, 0.0);
  EXPECT_EQ(init.rho, 0.0);
}

TEST(Initialization, InSpanPerturbation) {
  const auto gt = generate_ground_truth(30, 5, GroundTruthKind::kNonnegative, 23);
  const auto init = generate_initialization(gt, InitSpec{1.0, 0.0, false, 24});
  const Eigen::MatrixXd& u = init.in_span.values();
  EXPECT_GE(u.minCoeff(), -0.05);
  EXPECT_LT(u.maxCoeff(), 0.05);
  EXPECT_NE(u.diagonal().cwiseAbs().maxCoeff(), 0.0);  // diagonal perturbed too
  const Eigen::MatrixXd diff = init.a0.values() - gt.a_star.values();
  EXPECT_LE((diff - gt.a_star.values() * u).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::MatrixXd off = u;
  off.diagonal().setZero();
  EXPECT_NEAR(init.ell, dense::spectral_norm(off), 1e-12);
}

TEST(Initialization, ZeroDiagonalFlag) {
  const auto gt = generate_ground_truth(30, 5, GroundTruthKind::kNonnegative, 25);
  const auto init = generate_initialization(gt, InitSpec{2.0, 0.0, true, 26});
  EXPECT_TRUE((init.in_span.values().diagonal().array() == 0.0).all());
}

TEST(Initialization, OutOfSpanScalesLinearly) {
  const auto gt = generate_ground_truth(60, 6, GroundTruthKind::kNonnegative, 27);
  double base = 0.0;
  for (double rn : {1.0, 2.0, 4.0, 8.0}) {
    const auto init = generate_initialization(gt, InitSpec{1.0, rn, false, 28});
    const Eigen::MatrixXd i_plus_u = Eigen::MatrixXd::Identity(6, 6) + init.in_span.values();
    const double measured = dense::spectral_norm(init.a0.values() - gt.a_star.values() * i_plus_u);
    const double n_norm = dense::spectral_norm(init.out_of_span.values());
    EXPECT_NEAR(measured, n_norm, 1e-12 * (1.0 + n_norm));
    EXPECT_NEAR(init.rho, n_norm, 1e-12 * n_norm);
    EXPECT_LE(init.out_of_span.values().cwiseAbs().maxCoeff(), 0.05 * rn);
    if (rn == 1.0) base = n_norm;
    EXPECT_NEAR(n_norm / base, rn, 1e-12 * rn);
  }
}

TEST(Initialization, RejectsNegativeLevels) {
  const auto gt = generate_ground_truth(10, 2, GroundTruthKind::kNonnegative, 29);
  EXPECT_THROW(generate_initialization(gt, InitSpec{-1.0, 0.0, false, 0}), ValidationError);
  EXPECT_THROW(generate_initialization(gt, InitSpec{1.0, -0.5, false, 0}), ValidationError);
}

}  // namespace
}  // namespace andnmf
