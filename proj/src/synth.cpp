#include "andnmf/synth.hpp"

#include <cmath>
#include <sstream>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"
#include "andnmf/rng.hpp"

namespace andnmf {

namespace {

constexpr int kMaxRedraws = 16;
constexpr double kRankTolerance = 1e-10;

// Matrix with entries lo + (hi - lo) * U, one derived stream per column.
Eigen::MatrixXd uniform_matrix(Index rows, Index cols, double lo, double hi, std::uint64_t seed) {
  Eigen::MatrixXd m(rows, cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd sv = dense::singular_values(m);
  const double lo = sv(sv.size() - 1);
  return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

std::string to_string(GroundTruthKind kind) {
  switch (kind) {
    case GroundTruthKind::kNonnegative: return "random-uniform-nonneg";
    case GroundTruthKind::kSigned: return "random-uniform-signed";
    case GroundTruthKind::kLoaded: return "loaded-from-file";
  }
  return "unknown";
}

GroundTruth make_ground_truth(DenseMatrix a_star, GroundTruthKind provenance) {
  const Eigen::MatrixXd& a = a_star.values();
  for (Index j = 0; j < a.cols(); ++j) {
    if (a.col(j).norm() <= 1e-12) {
      std::ostringstream os;
      os << "ground truth column " << j << " is (numerically) zero";
      throw ValidationError(os.str());
    }
  }
  const double cond = condition_number(a);
  return {std::move(a_star), provenance, cond};
}

GroundTruth generate_ground_truth(Index w, Index d, GroundTruthKind kind, std::uint64_t seed) {
  if (w < 1 || d < 1) throw ValidationError("generate_ground_truth: W and D must be >= 1");
  if (w < d) {
    std::ostringstream os;
    os << "generate_ground_truth: W=" << w << " < D=" << d << "; decoding needs a left inverse";
    throw ValidationError(os.str());
  }
  if (kind == GroundTruthKind::kLoaded) throw ValidationError("generate_ground_truth: cannot generate a loaded matrix");
  const double lo = kind == GroundTruthKind::kSigned ? -0.5 : 0.0;
  const double hi = kind == GroundTruthKind::kSigned ? 0.5 : 1.0;

  std::uint64_t attempt_seed = seed;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Eigen::MatrixXd a = uniform_matrix(w, d, lo, hi, attempt_seed);
    const double cond = condition_number(a);
    if (std::isfinite(cond) && 1.0 / cond > kRankTolerance) return {DenseMatrix(std::move(a)), kind, cond};
    attempt_seed = derive_seed(seed, static_cast<std::uint64_t>(attempt) + 1000);
  }
  throw NumericalError("generate_ground_truth: could not draw a full column rank matrix");
}

Dataset generate_dataset(const GroundTruth& gt, const WeightSpec& wspec, const NoiseSpec& noise, Index n) {
  const Eigen::MatrixXd& a = gt.a_star.values();
  if (wspec.dimension != a.cols()) {
    std::ostringstream os;
    os << "generate_dataset: weight dimension " << wspec.dimension << " != ground truth columns " << a.cols();
    throw ValidationError(os.str());
  }
  if (!(noise.gamma >= 0.0) || !std::isfinite(noise.gamma))
    throw ValidationError("generate_dataset: gamma must be finite and >= 0");

  DenseMatrix x = sample_weights(wspec, n);
  const Index w = a.rows();
  Eigen::MatrixXd zeta = Eigen::MatrixXd::Zero(w, n);
  if (noise.gamma > 0.0) {
    const double scale = noise.gamma / std::sqrt(static_cast<double>(w));
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
      Rng rng(derive_seed(noise.seed, static_cast<std::uint64_t>(j)));
      for (Index i = 0; i < w; ++i) zeta(i, j) = scale * rng.normal();
    }
  }
  Eigen::MatrixXd y = kernels::parallel::multiply(a, x.values());
  if (noise.gamma > 0.0) y += zeta;
  return {DenseMatrix(std::move(y)), std::move(x), DenseMatrix(std::move(zeta))};
}

Initialization generate_initialization(const GroundTruth& gt, const InitSpec& ispec) {
  if (!(ispec.in_span_level >= 0.0) || !(ispec.out_span_level >= 0.0) ||
      !std::isfinite(ispec.in_span_level) || !std::isfinite(ispec.out_span_level))
    throw ValidationError("generate_initialization: r_l and r_n must be finite and >= 0");
  const Eigen::MatrixXd& a = gt.a_star.values();
  const Index w = a.rows();
  const Index d = a.cols();

  // Separate streams for U and N: changing one level leaves the other draw intact.
  Eigen::MatrixXd u = ispec.in_span_level * uniform_matrix(d, d, -0.05, 0.05, derive_seed(ispec.seed, 1));
  if (ispec.zero_diagonal) u.diagonal().setZero();
  Eigen::MatrixXd noise = ispec.out_span_level * uniform_matrix(w, d, -0.05, 0.05, derive_seed(ispec.seed, 2));

  const Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(d, d) + u;
  Eigen::MatrixXd a0 = kernels::parallel::multiply(a, mix) + noise;

  Eigen::MatrixXd off = u;
  off.diagonal().setZero();
  Initialization out{DenseMatrix(std::move(a0)), DenseMatrix(u), DenseMatrix(noise), 0.0, 0.0};
  out.ell = dense::spectral_norm(off);
  out.rho = dense::spectral_norm(noise);
  return out;
}

}  // namespace andnmf
