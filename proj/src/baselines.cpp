#include "andnmf/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"
#include "andnmf/metrics.hpp"
#include "andnmf/rng.hpp"

namespace andnmf {

namespace {

namespace kp = kernels::parallel;

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const char* who) {
  if (a.rows() != y.rows() || a.cols() != x.rows() || x.cols() != y.cols()) {
    std::ostringstream os;
    os << who << ": incompatible shapes A " << a.rows() << "x" << a.cols() << ", X " << x.rows() << "x" << x.cols()
       << ", Y " << y.rows() << "x" << y.cols();
    throw ValidationError(os.str());
  }
}

void require_nonnegative(const Eigen::MatrixXd& m, const char* what) {
  if (m.minCoeff() < 0.0)
    throw ValidationError(std::string("multiplicative update requires nonnegative ") + what +
                          " (data with negative entries, e.g. the NEG preset, is unsupported by MU)");
}

void mu_inplace(Eigen::MatrixXd& a, Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double eps) {
  const Eigen::MatrixXd aty = kp::transposed_multiply(a, y);
  const Eigen::MatrixXd ata = kp::transposed_multiply(a, a);
  const Eigen::MatrixXd x_den = kp::multiply(ata, x).array() + eps;
  x = x.array() * aty.array() / x_den.array();

  const Eigen::MatrixXd yxt = kp::multiply_transposed(y, x);
  const Eigen::MatrixXd xxt = kp::multiply_transposed(x, x);
  const Eigen::MatrixXd a_den = kp::multiply(a, xxt).array() + eps;
  a = a.array() * yxt.array() / a_den.array();
}

void hals_inplace(Eigen::MatrixXd& a, Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double eps) {
  const Eigen::MatrixXd yxt = kp::multiply_transposed(y, x);
  const Eigen::MatrixXd xxt = kp::multiply_transposed(x, x);
  for (Index j = 0; j < a.cols(); ++j) {
    const Eigen::VectorXd grad = yxt.col(j) - a * xxt.col(j);
    a.col(j) = (a.col(j) + grad / (xxt(j, j) + eps)).cwiseMax(0.0);
  }

  const Eigen::MatrixXd aty = kp::transposed_multiply(a, y);
  const Eigen::MatrixXd ata = kp::transposed_multiply(a, a);
  for (Index j = 0; j < x.rows(); ++j) {
    const Eigen::RowVectorXd grad = aty.row(j) - ata.row(j) * x;
    x.row(j) = (x.row(j) + grad / (ata(j, j) + eps)).cwiseMax(0.0);
  }
}

void anls_inplace(Eigen::MatrixXd& a, Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Index inner) {
  if (inner <= 0) return;
  {
    const Eigen::MatrixXd aty = kp::transposed_multiply(a, y);
    const Eigen::MatrixXd ata = kp::transposed_multiply(a, a);
    const double lip = dense::spectral_norm(ata);
    if (lip > 0.0) {
      for (Index it = 0; it < inner; ++it) x = (x - (kp::multiply(ata, x) - aty) / lip).cwiseMax(0.0);
    }
  }
  {
    const Eigen::MatrixXd yxt = kp::multiply_transposed(y, x);
    const Eigen::MatrixXd xxt = kp::multiply_transposed(x, x);
    const double lip = dense::spectral_norm(xxt);
    if (lip > 0.0) {
      for (Index it = 0; it < inner; ++it) a = (a - (kp::multiply(a, xxt) - yxt) / lip).cwiseMax(0.0);
    }
  }
}

}  // namespace

std::string to_string(BaselineAlgorithm algorithm) {
  switch (algorithm) {
    case BaselineAlgorithm::kMu: return "mu";
    case BaselineAlgorithm::kHals: return "hals";
    case BaselineAlgorithm::kAnls: return "anls";
  }
  return "unknown";
}

void validate(const BaselineConfig& cfg) {
  if (cfg.outer_iters < 0) throw ValidationError("baseline config: outer_iters must be >= 0");
  if (cfg.inner_iters < 1) throw ValidationError("baseline config: inner_iters must be >= 1");
  if (!(cfg.epsilon_floor > 0.0)) throw ValidationError("baseline config: epsilon_floor must be > 0");
  if (cfg.eval_every < 1) throw ValidationError("baseline config: eval_every must be >= 1");
}

Factors mu_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y, double epsilon_floor) {
  Eigen::MatrixXd av = a.values(), xv = x.values();
  check_shapes(av, xv, y.values(), "mu_step");
  require_nonnegative(av, "A");
  require_nonnegative(xv, "X");
  require_nonnegative(y.values(), "Y");
  mu_inplace(av, xv, y.values(), epsilon_floor);
  return {DenseMatrix(std::move(av)), DenseMatrix(std::move(xv))};
}

Factors hals_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y, double epsilon_floor) {
  Eigen::MatrixXd av = a.values(), xv = x.values();
  check_shapes(av, xv, y.values(), "hals_step");
  hals_inplace(av, xv, y.values(), epsilon_floor);
  return {DenseMatrix(std::move(av)), DenseMatrix(std::move(xv))};
}

Factors anls_step(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& y, Index inner_iters) {
  Eigen::MatrixXd av = a.values(), xv = x.values();
  check_shapes(av, xv, y.values(), "anls_step");
  if (inner_iters < 0) throw ValidationError("anls_step: inner_iters must be >= 0");
  anls_inplace(av, xv, y.values(), inner_iters);
  return {DenseMatrix(std::move(av)), DenseMatrix(std::move(xv))};
}

RunResult run_baseline(const BaselineConfig& cfg, const DenseMatrix& y, const DenseMatrix& a0,
                       const DenseMatrix* truth, const TraceSink& sink) {
  validate(cfg);
  const Eigen::MatrixXd& yv = y.values();
  if (a0.rows() != y.rows()) throw ValidationError("run_baseline: A0 and Y row counts differ");
  if (cfg.algorithm == BaselineAlgorithm::kMu) require_nonnegative(yv, "Y");

  std::optional<TruthEvaluator> evaluator;
  if (truth) {
    if (truth->rows() != a0.rows() || truth->cols() != a0.cols())
      throw ValidationError("run_baseline: ground truth must have the same shape as A0");
    evaluator.emplace(*truth);
  }

  const Index d = a0.cols();
  const Index n = y.cols();
  Eigen::MatrixXd a = a0.values().cwiseMax(0.0);
  Eigen::MatrixXd x(d, n);
  for (Index j = 0; j < n; ++j) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(j)));
    for (Index i = 0; i < d; ++i) x(i, j) = rng.uniform();
  }

  RunResult result{DenseMatrix(a), {}, 0, {}, {}};
  const auto clock_start = std::chrono::steady_clock::now();
  auto record = [&](Index iter) {
    TraceRecord rec;
    rec.stage = 0;
    rec.iter = iter;
    rec.alpha = std::numeric_limits<double>::quiet_NaN();
    if (evaluator) {
      rec.total_error = evaluator->total_error(a);
      const Decomposition dec = evaluator->decompose(a);
      rec.e_norm = dec.e_norm;
      rec.n_norm = dec.n_norm;
    } else {
      rec.total_error = (yv - kp::multiply(a, x)).norm();
      rec.e_norm = rec.n_norm = std::numeric_limits<double>::quiet_NaN();
    }
    rec.log10_error = std::log10(rec.total_error);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    result.trace.records.push_back(rec);
    if (sink) sink(rec);
  };

  record(0);
  for (Index it = 1; it <= cfg.outer_iters; ++it) {
    switch (cfg.algorithm) {
      case BaselineAlgorithm::kMu: mu_inplace(a, x, yv, cfg.epsilon_floor); break;
      case BaselineAlgorithm::kHals: hals_inplace(a, x, yv, cfg.epsilon_floor); break;
      case BaselineAlgorithm::kAnls: anls_inplace(a, x, yv, cfg.inner_iters); break;
    }
    if (!a.allFinite() || a.cwiseAbs().maxCoeff() > kDivergenceLimit) throw DivergenceError(0, it, result.trace);
    if (it % cfg.eval_every == 0 || it == cfg.outer_iters) record(it);
  }
  result.a_final = DenseMatrix(a);
  return result;
}

}  // namespace andnmf
