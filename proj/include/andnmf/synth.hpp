#pragma once

#include <cstdint>
#include <string>

#include "andnmf/matrix.hpp"
#include "andnmf/weights.hpp"

namespace andnmf {

enum class GroundTruthKind { kNonnegative, kSigned, kLoaded };

std::string to_string(GroundTruthKind kind);

struct GroundTruth {
  DenseMatrix a_star;
  GroundTruthKind provenance = GroundTruthKind::kNonnegative;
  double condition_number = 0.0;
};

// Wraps a matrix read from disk; rejects zero columns.
GroundTruth make_ground_truth(DenseMatrix a_star, GroundTruthKind provenance);

// Gaussian noise gamma * Normal(0, I / W): gamma1 = gamma^2 / W bounds the
// second moment, gamma2 the per-sample norm (~gamma).
struct NoiseSpec {
  double gamma = 0.0;
  std::uint64_t seed = 0;

  double gamma1(Index w) const { return gamma * gamma / static_cast<double>(w); }
  double gamma2() const { return gamma; }
};

// A0 = A*(I + U) + N, U ~ r_l * Unif[-0.05, 0.05)^{DxD}, N ~ r_n * Unif[-0.05, 0.05)^{WxD}.
struct InitSpec {
  double in_span_level = 1.0;   // r_l
  double out_span_level = 0.0;  // r_n
  bool zero_diagonal = false;   // zero diag(U) instead of perturbing it
  std::uint64_t seed = 0;
};

struct Dataset {
  DenseMatrix y;     // W x n observations
  DenseMatrix x;     // D x n weights, diagnostics only
  DenseMatrix zeta;  // W x n noise
};

struct Initialization {
  DenseMatrix a0;
  DenseMatrix in_span;      // U
  DenseMatrix out_of_span;  // N
  double ell = 0.0;         // ||offdiag(U)||_2
  double rho = 0.0;         // ||N||_2
};

// Entries Unif[0, 1) (nonnegative) or Unif[-0.5, 0.5) (signed). Redraws with a
// derived seed if the result is column-rank deficient.
GroundTruth generate_ground_truth(Index w, Index d, GroundTruthKind kind, std::uint64_t seed);

// Y = A* X + Zeta, X drawn from wspec (its own seed), Zeta from noise.seed.
Dataset generate_dataset(const GroundTruth& gt, const WeightSpec& wspec, const NoiseSpec& noise, Index n);

Initialization generate_initialization(const GroundTruth& gt, const InitSpec& ispec);

}  // namespace andnmf
