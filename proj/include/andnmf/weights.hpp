#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "andnmf/matrix.hpp"

namespace andnmf {

// Exactly `support` ones on a uniformly random support, zeros elsewhere.
struct SparseBinary {
  Index support = 1;
};

// Dirichlet with per-coordinate concentration.
struct Dirichlet {
  Eigen::VectorXd concentration;
};

// softmax(g) with g ~ Normal(mean, covariance).
struct LogisticNormal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// `support` coordinates drawn Uniform[floor, ceiling), zeros elsewhere.
struct SparseUniform {
  Index support = 1;
  double floor = 0.0;
  double ceiling = 1.0;
};

using WeightFamily = std::variant<SparseBinary, Dirichlet, LogisticNormal, SparseUniform>;

// Distribution of the nonnegative weight vector x.
struct WeightSpec {
  WeightFamily family;
  Index dimension = 1;
  std::uint64_t seed = 0;

  static WeightSpec sparse_binary(Index dimension, Index support, std::uint64_t seed);
  // Symmetric Dirichlet with concentration `alpha` on every coordinate.
  static WeightSpec dirichlet(Index dimension, double alpha, std::uint64_t seed);
  // Zero mean, Toeplitz covariance rho^|i-j|.
  static WeightSpec logistic_normal(Index dimension, double rho, std::uint64_t seed);
  static WeightSpec sparse_uniform(Index dimension, Index support, double floor, double ceiling,
                                   std::uint64_t seed);

  std::string family_name() const;
};

// Throws ValidationError describing the first violated invariant.
void validate(const WeightSpec& spec);

// (r, k, m, lambda) correlation parameters plus decay order q.
// q == +infinity for binary weights; nullopt when only an empirical value is
// available (see decay_profile).
struct GccParams {
  double r = 0.0;
  double k = 0.0;
  double m = 0.0;
  double lambda = 0.0;
  std::optional<double> q;
};

// D x n matrix whose columns are i.i.d. draws. Column j uses its own stream
// derived from (spec.seed, j), so output is bitwise reproducible and
// independent of thread scheduling.
DenseMatrix sample_weights(const WeightSpec& spec, Index n);

// Closed-form parameters for SparseBinary and symmetric Dirichlet.
// Throws ValidationError for other families.
GccParams gcc_closed_form(const WeightSpec& spec);

struct GccEstimate {
  GccParams params;               // tightest values for each condition
  Eigen::MatrixXd second_moment;  // (1/n) X X^T
  Eigen::VectorXd mean;
  double min_eigenvalue = 0.0;
  Index samples = 0;
};

// Empirical tightest GCC parameters. Entries must lie in [0, 1] up to 1e-9;
// otherwise a ValidationError lists the offending coordinates.
GccEstimate gcc_from_samples(const DenseMatrix& x);

struct DecayRow {
  double alpha = 0.0;
  double max_conditional_cdf = 0.0;  // max_i Pr[x_i <= alpha | x_i != 0]
};

struct DecayProfile {
  std::vector<DecayRow> rows;
  double fitted_q = std::numeric_limits<double>::infinity();
  std::vector<Index> skipped_coordinates;  // never nonzero in the sample
};

// Empirical order-q decay check on a grid of alphas in (0, 1). The fitted q is
// the largest value with cdf_i(alpha) <= alpha^q + 2/sqrt(n_i) at every grid
// point and coordinate, where n_i is the nonzero count of coordinate i.
DecayProfile decay_profile(const DenseMatrix& x, const std::vector<double>& alphas);

}  // namespace andnmf
