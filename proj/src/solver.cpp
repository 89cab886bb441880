#include "andnmf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "andnmf/kernels.hpp"
#include "andnmf/metrics.hpp"
#include "andnmf/rng.hpp"

namespace andnmf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string divergence_message(Index stage, Index iter) {
  std::ostringstream os;
  os << "AND diverged at stage " << stage << ", iteration " << iter << " (|A| exceeded "
     << kDivergenceLimit << ")";
  return os.str();
}

bool diverged(const Eigen::MatrixXd& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (!(std::abs(a(i, j)) <= kDivergenceLimit)) return true;
  return false;
}

// ||Y - A Z||_F^2 = ||Y||^2 - 2 <A, Y Z^T> + <A^T A, Z Z^T>
double residual_norm(double y_sq, const Eigen::MatrixXd& a, const Eigen::MatrixXd& yz,
                     const Eigen::MatrixXd& zz) {
  const Eigen::MatrixXd ata = kernels::parallel::transposed_multiply(a, a);
  const double r2 = y_sq - 2.0 * (a.array() * yz.array()).sum() + (ata.array() * zz.array()).sum();
  return std::sqrt(std::max(r2, 0.0));
}

// Gathers `count` columns starting at `start`, wrapping around.
Eigen::MatrixXd window(const Eigen::MatrixXd& m, Index start, Index count) {
  const Index n = m.cols();
  if (start + count <= n) return m.middleCols(start, count);
  Eigen::MatrixXd out(m.rows(), count);
  const Index head = n - start;
  out.leftCols(head) = m.rightCols(head);
  out.rightCols(count - head) = m.leftCols(count - head);
  return out;
}

}  // namespace

DivergenceError::DivergenceError(Index stage, Index iter, RunTrace partial)
    : NumericalError(divergence_message(stage, iter)), stage_(stage), iter_(iter), partial_(std::move(partial)) {}

void validate(const ThresholdSchedule& schedule) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantThreshold>) {
          if (!(s.value >= 0.0) || !std::isfinite(s.value))
            throw ValidationError("constant threshold must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, GeometricThreshold>) {
          if (!(s.start > 0.0) || !std::isfinite(s.start))
            throw ValidationError("geometric threshold: start must be > 0");
          if (!(s.ratio > 0.0 && s.ratio <= 1.0)) throw ValidationError("geometric threshold: ratio must lie in (0, 1]");
        } else {
          if (!(s.lambda > 0.0)) throw ValidationError("theory threshold: lambda must be > 0");
          if (!(s.r >= 1.0)) throw ValidationError("theory threshold: r must be >= 1");
          if (!(s.q >= 1.0)) throw ValidationError("theory threshold: q must be >= 1");
        }
      },
      schedule);
}

double stage_threshold(const ThresholdSchedule& schedule, Index stage, std::optional<double> e_norm_estimate) {
  validate(schedule);
  if (stage < 0) throw ValidationError("stage_threshold: stage index must be >= 0");
  if (const auto* c = std::get_if<ConstantThreshold>(&schedule)) return c->value;
  if (const auto* g = std::get_if<GeometricThreshold>(&schedule))
    return g->start * std::pow(g->ratio, static_cast<double>(stage));
  const auto& t = std::get<TheoryThreshold>(schedule);
  if (!e_norm_estimate) throw ValidationError("stage_threshold: theory-driven schedule needs an ||E_0|| estimate");
  if (!(*e_norm_estimate >= 0.0)) throw ValidationError("stage_threshold: ||E_0|| estimate must be >= 0");
  const double alpha = std::pow(t.lambda * *e_norm_estimate / t.r, 2.0 / (t.q + 1.0));
  return std::clamp(alpha, std::numeric_limits<double>::min(), 0.25);
}

void validate(const AndConfig& cfg) {
  if (cfg.stages < 1) throw ValidationError("AND config: stages must be >= 1");
  if (cfg.iters_per_stage < 1) throw ValidationError("AND config: iters_per_stage must be >= 1");
  if (cfg.eta && !(*cfg.eta > 0.0 && std::isfinite(*cfg.eta))) throw ValidationError("AND config: eta must be > 0");
  if (cfg.minibatch < 0) throw ValidationError("AND config: minibatch must be >= 0");
  if (!(cfg.pinv_rel_tol > 0.0 && cfg.pinv_rel_tol < 1.0))
    throw ValidationError("AND config: pinv_rel_tol must lie in (0, 1)");
  if (cfg.eval_every < 1) throw ValidationError("AND config: eval_every must be >= 1");
  validate(cfg.schedule);
}

DenseMatrix decode(const DenseMatrix& pinv, const DenseMatrix& y, double alpha) {
  if (pinv.cols() != y.rows()) {
    std::ostringstream os;
    os << "decode: decoder is " << pinv.rows() << "x" << pinv.cols() << " but Y has " << y.rows() << " rows";
    throw ValidationError(os.str());
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("decode: alpha must be finite and >= 0");
  return DenseMatrix(kernels::parallel::threshold(kernels::parallel::multiply(pinv.values(), y.values()), alpha));
}

DenseMatrix gradient_update(const DenseMatrix& a, const DenseMatrix& y, const DenseMatrix& z, double eta) {
  if (a.rows() != y.rows() || a.cols() != z.rows() || y.cols() != z.cols()) {
    std::ostringstream os;
    os << "gradient_update: incompatible shapes A " << a.rows() << "x" << a.cols() << ", Y " << y.rows() << "x"
       << y.cols() << ", Z " << z.rows() << "x" << z.cols();
    throw ValidationError(os.str());
  }
  if (!std::isfinite(eta)) throw ValidationError("gradient_update: eta must be finite");
  const Eigen::MatrixXd resid = y.values() - kernels::parallel::multiply(a.values(), z.values());
  return DenseMatrix(Eigen::MatrixXd(a.values() + eta * kernels::parallel::multiply_transposed(resid, z.values())));
}

RunResult run(const DenseMatrix& a0, const DenseMatrix& y, const AndConfig& cfg, const DenseMatrix* truth,
              const TraceSink& sink) {
  validate(cfg);
  if (a0.rows() != y.rows()) {
    std::ostringstream os;
    os << "run: A0 has " << a0.rows() << " rows but Y has " << y.rows();
    throw ValidationError(os.str());
  }
  std::optional<TruthEvaluator> evaluator;
  if (truth) {
    if (truth->rows() != a0.rows() || truth->cols() != a0.cols())
      throw ValidationError("run: ground truth must have the same shape as A0");
    evaluator.emplace(*truth);
  }

  const Index d = a0.cols();
  const Index n = y.cols();
  const Index batch = (cfg.minibatch == 0 || cfg.minibatch >= n) ? n : cfg.minibatch;

  // Minibatches walk a seeded column permutation; the full batch keeps
  // natural order.
  Eigen::MatrixXd y_data;
  if (batch < n) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(cfg.seed);
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    y_data.resize(y.rows(), n);
    for (Index j = 0; j < n; ++j) y_data.col(j) = y.values().col(order[static_cast<std::size_t>(j)]);
  } else {
    y_data = y.values();
  }
  const double y_sq = y_data.squaredNorm();

  Eigen::MatrixXd a = a0.values();
  RunResult result{a0, {}, 0, {}, {}};
  const auto clock_start = std::chrono::steady_clock::now();

  auto record = [&](Index stage, Index iter, double alpha, const Eigen::MatrixXd& yz, const Eigen::MatrixXd& zz) {
    TraceRecord rec;
    rec.stage = stage;
    rec.iter = iter;
    rec.alpha = alpha;
    if (evaluator) {
      rec.total_error = evaluator->total_error(a);
      const Decomposition dec = evaluator->decompose(a);
      rec.e_norm = dec.e_norm;
      rec.n_norm = dec.n_norm;
    } else {
      rec.total_error = residual_norm(y_sq, a, yz, zz);
      rec.e_norm = kNaN;
      rec.n_norm = kNaN;
    }
    rec.log10_error = std::log10(rec.total_error);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    result.trace.records.push_back(rec);
    if (sink) sink(rec);
  };

  const bool theory = std::holds_alternative<TheoryThreshold>(cfg.schedule);
  Index cursor = 0;
  for (Index stage = 0; stage < cfg.stages; ++stage) {
    double alpha;
    if (theory && evaluator) {
      alpha = stage_threshold(cfg.schedule, stage, evaluator->decompose(a).e_norm);
    } else if (theory) {
      alpha = stage_threshold(GeometricThreshold{}, stage);
    } else {
      alpha = stage_threshold(cfg.schedule, stage);
    }

    Index rank = 0;
    const Eigen::MatrixXd pinv = dense::pseudo_inverse(a, cfg.pinv_rel_tol, &rank);
    ++result.pinv_computations;
    if (rank < d) {
      std::ostringstream os;
      os << "run: iterate at the start of stage " << stage << " has rank " << rank << " < " << d;
      if (stage == 0) throw ValidationError("run: A0 must have full column rank; " + os.str());
      throw NumericalError(os.str());
    }
    const Eigen::MatrixXd z = kernels::parallel::threshold(kernels::parallel::multiply(pinv, y_data), alpha);

    // Full-data moments; in full-batch mode these drive every update of the stage.
    Eigen::MatrixXd yz_full, zz_full;
    if (batch == n || !evaluator) {
      yz_full = kernels::parallel::multiply_transposed(y_data, z);
      zz_full = kernels::parallel::multiply_transposed(z, z);
    }
    auto batch_moments = [&](Eigen::MatrixXd& yz, Eigen::MatrixXd& zz) {
      if (batch == n) return;
      const Eigen::MatrixXd yb = window(y_data, cursor, batch);
      const Eigen::MatrixXd zb = window(z, cursor, batch);
      yz = kernels::parallel::multiply_transposed(yb, zb);
      zz = kernels::parallel::multiply_transposed(zb, zb);
      cursor = (cursor + batch) % n;
    };

    Eigen::MatrixXd yz_b = yz_full, zz_b = zz_full;
    batch_moments(yz_b, zz_b);
    const double eta = cfg.eta ? *cfg.eta : 0.5 / (dense::power_iteration_norm(zz_b) + 1e-12);
    result.stage_alphas.push_back(alpha);
    result.stage_etas.push_back(eta);

    if (stage == 0) record(0, 0, alpha, yz_full, zz_full);

    for (Index iter = 1; iter <= cfg.iters_per_stage; ++iter) {
      if (iter > 1) batch_moments(yz_b, zz_b);
      a += eta * (yz_b - kernels::parallel::multiply(a, zz_b));
      if (diverged(a)) throw DivergenceError(stage, iter, result.trace);
      if (iter % cfg.eval_every == 0 || iter == cfg.iters_per_stage) record(stage, iter, alpha, yz_full, zz_full);
    }
  }
  result.a_final = DenseMatrix(a);
  return result;
}

RecurrenceTrajectory simulate_update_recurrence(const RecurrenceInput& in) {
  const Index d = in.lambda.rows();
  auto square = [d](const Eigen::MatrixXd& m) { return m.rows() == d && m.cols() == d; };
  if (d < 1 || !square(in.lambda) || !square(in.sigma0) || !square(in.e0) || !square(in.q))
    throw ValidationError("update recurrence: Sigma0, E0, Lambda and Q must all be D x D");
  for (Index i = 0; i < d; ++i) {
    if (in.e0(i, i) != 0.0) throw ValidationError("update recurrence: E0 must have a zero diagonal");
    for (Index j = 0; j < d; ++j)
      if (i != j && in.sigma0(i, j) != 0.0) throw ValidationError("update recurrence: Sigma0 must be diagonal");
  }
  const double scale = std::max(1.0, in.lambda.cwiseAbs().maxCoeff());
  if ((in.lambda - in.lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("update recurrence: Lambda must be symmetric");
  const double lmin = dense::min_symmetric_eigenvalue(in.lambda);
  const double lmax = dense::max_symmetric_eigenvalue(in.lambda);
  if (lmin < -1e-12 * scale) throw ValidationError("update recurrence: Lambda must be positive semidefinite");
  if (!(in.eta > 0.0) || !(in.eta * lmax < 1.0)) throw ValidationError("update recurrence: need 0 < eta * lambda_max < 1");
  if (!(in.r_bound >= 0.0)) throw ValidationError("update recurrence: R bound must be >= 0");
  if (in.steps < 0) throw ValidationError("update recurrence: steps must be >= 0");

  RecurrenceTrajectory out;
  out.lambda_min = std::max(lmin, 0.0);
  const Eigen::MatrixXd contraction = Eigen::MatrixXd::Identity(d, d) - in.eta * in.lambda;
  const Eigen::MatrixXd drift = in.eta * in.q * in.lambda;
  Eigen::MatrixXd m = in.sigma0 + in.e0;
  const double d0 = dense::spectral_norm(m - in.q);
  const double rate = 1.0 - in.eta * out.lambda_min;
  double floor_term;
  if (in.r_bound == 0.0) {
    floor_term = 0.0;
  } else {
    floor_term = out.lambda_min > 0.0 ? in.r_bound / out.lambda_min : std::numeric_limits<double>::infinity();
  }

  Rng rng(in.seed);
  Eigen::MatrixXd r(d, d);
  for (Index t = 0; t <= in.steps; ++t) {
    if (t > 0) {
      m = m * contraction + drift;
      if (in.r_bound > 0.0) {
        for (Index j = 0; j < d; ++j)
          for (Index i = 0; i < d; ++i) r(i, j) = rng.normal();
        const double rn = dense::spectral_norm(r);
        if (rn > 0.0) m += in.eta * (in.r_bound / rn) * r;
      }
    }
    const double dist = dense::spectral_norm(m - in.q);
    const double bound = d0 * std::pow(rate, static_cast<double>(t)) + floor_term;
    out.distance.push_back(dist);
    out.bound.push_back(bound);
    if (out.first_violation < 0 && dist > bound + 1e-12 * (1.0 + bound)) out.first_violation = t;
  }
  return out;
}

}  // namespace andnmf
