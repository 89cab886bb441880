#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "andnmf/matrix.hpp"
#include "andnmf/solver.hpp"

namespace andnmf {

enum class BaselineAlgorithm { kMu, kHals, kAnls };

std::string to_string(BaselineAlgorithm algorithm);

struct BaselineConfig {
  BaselineAlgorithm algorithm = BaselineAlgorithm::kHals;
  Index outer_iters = 100;
  Index inner_iters = 20;         // ANLS projected-gradient steps per half
  double epsilon_floor = 1e-12;   // denominator guard for MU and HALS
  std::uint64_t seed = 0;         // X initialization, Unif[0, 1)
  Index eval_every = 1;
};

void validate(const BaselineConfig& cfg);

struct Factors {
  DenseMatrix a;
  DenseMatrix x;
};

// Lee-Seung Frobenius multiplicative update, X first then A.
// Rejects negative entries in any input.
Factors mu_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y,
                double epsilon_floor = 1e-12);

// One HALS sweep: every column of A in order, then every row of X.
Factors hals_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y,
                  double epsilon_floor = 1e-12);

// Projected gradient NNLS: `inner_iters` steps on X with step 1/||A^T A||_2,
// then `inner_iters` steps on A with step 1/||X X^T||_2.
Factors anls_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y, Index inner_iters);

// Drives outer iterations from A0 (projected onto the nonnegative orthant) and a
// seeded Unif[0, 1) X. Trace rows use the AND schema with stage 0, iter = outer
// iteration, alpha = NaN.
RunResult run_baseline(const BaselineConfig& cfg, const DenseMatrix& y, const DenseMatrix& a0,
                       const DenseMatrix* truth = nullptr, const TraceSink& sink = {});

}  // namespace andnmf
