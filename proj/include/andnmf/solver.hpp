#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "andnmf/errors.hpp"
#include "andnmf/linalg.hpp"
#include "andnmf/matrix.hpp"

namespace andnmf {

// ---------------------------------------------------------------------------
// Threshold schedules

struct ConstantThreshold {
  double value = 0.25;
};

// alpha_j = start * ratio^j
struct GeometricThreshold {
  double start = 0.1;
  double ratio = 1.0 / 1.1;
};

// alpha = (lambda * ||E_0||_2 / r)^(2 / (q + 1)), clamped to (0, 1/4].
struct TheoryThreshold {
  double lambda = 1.0;
  double r = 1.0;
  double q = 1.0;
};

using ThresholdSchedule = std::variant<ConstantThreshold, GeometricThreshold, TheoryThreshold>;

void validate(const ThresholdSchedule& schedule);

// Threshold for stage j (0-based). TheoryThreshold needs the current
// off-diagonal error estimate and throws ValidationError without it.
double stage_threshold(const ThresholdSchedule& schedule, Index stage,
                       std::optional<double> e_norm_estimate = std::nullopt);

// ---------------------------------------------------------------------------
// Configuration and traces

struct AndConfig {
  Index stages = 30;
  Index iters_per_stage = 50;
  // Step size. When unset, each stage uses 0.5 / (||Z Z^T||_2 + 1e-12) from
  // its first decoded batch.
  std::optional<double> eta;
  ThresholdSchedule schedule = GeometricThreshold{};
  // 0 = full batch. Otherwise each iteration uses the next `minibatch`
  // columns of a seeded column permutation, cycling.
  Index minibatch = 0;
  double pinv_rel_tol = kDefaultPinvTolerance;
  std::uint64_t seed = 0;
  // Record a trace row every `eval_every` iterations (and always at stage end).
  Index eval_every = 1;
};

void validate(const AndConfig& cfg);

struct TraceRecord {
  Index stage = 0;
  Index iter = 0;
  double seconds = 0.0;
  double alpha = 0.0;        // NaN when not applicable (baselines)
  double total_error = 0.0;  // correlation error, or ||Y - A Z||_F without truth
  double log10_error = 0.0;
  double e_norm = 0.0;       // NaN without ground truth
  double n_norm = 0.0;       // NaN without ground truth
};

struct RunTrace {
  std::vector<TraceRecord> records;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct RunResult {
  DenseMatrix a_final;
  RunTrace trace;
  Index pinv_computations = 0;
  std::vector<double> stage_alphas;
  std::vector<double> stage_etas;
};

// Raised when an iterate blows up; carries the trace up to that point.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(Index stage, Index iter, RunTrace partial);
  Index stage() const noexcept { return stage_; }
  Index iter() const noexcept { return iter_; }
  const RunTrace& partial_trace() const noexcept { return partial_; }

 private:
  Index stage_;
  Index iter_;
  RunTrace partial_;
};

inline constexpr double kDivergenceLimit = 1e12;

// ---------------------------------------------------------------------------
// Algorithm steps

// Z = phi_alpha(pinv * Y).
DenseMatrix decode(const DenseMatrix& pinv, const DenseMatrix& y, double alpha);

// A + eta * (Y - A Z) Z^T, accumulated over every column.
DenseMatrix gradient_update(const DenseMatrix& a, const DenseMatrix& y, const DenseMatrix& z, double eta);

// Staged alternating decode/update. Within a stage the decoding matrix is the
// pseudo-inverse of the stage-start iterate, computed once. Trace rows are
// pushed to `sink` as they are produced and also returned.
//
// Stage 0 begins with a row at iter 0 describing A0; every stage then records
// iterations 1..T (subject to eval_every).
RunResult run(const DenseMatrix& a0, const DenseMatrix& y, const AndConfig& cfg,
              const DenseMatrix* truth = nullptr, const TraceSink& sink = {});

// ---------------------------------------------------------------------------
// Numerical check of the update-recurrence bound
//
//   M_{t+1} = M_t (I - eta Lambda) + eta Q Lambda + eta R_t,  ||R_t||_2 <= R
//   ||M_t - Q||_2 <= ||M_0 - Q||_2 (1 - eta lambda_min)^t + R / lambda_min

struct RecurrenceInput {
  Eigen::MatrixXd sigma0;  // diagonal
  Eigen::MatrixXd e0;      // zero diagonal
  Eigen::MatrixXd lambda;  // symmetric PSD
  Eigen::MatrixXd q;
  double r_bound = 0.0;
  double eta = 0.1;
  Index steps = 100;
  std::uint64_t seed = 0;  // R_t are Gaussian matrices rescaled to norm r_bound
};

struct RecurrenceTrajectory {
  std::vector<double> distance;  // ||M_t - Q||_2, t = 0..steps
  std::vector<double> bound;     // right-hand side at each t
  double lambda_min = 0.0;
  Index first_violation = -1;
  bool bound_holds() const noexcept { return first_violation < 0; }
};

RecurrenceTrajectory simulate_update_recurrence(const RecurrenceInput& in);

}  // namespace andnmf
