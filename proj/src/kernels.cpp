#include "andnmf/kernels.hpp"

#include <cmath>
#include <limits>

#include "andnmf/errors.hpp"

#ifdef ANDNMF_HAVE_OPENMP
#include <omp.h>
#endif

namespace andnmf::kernels {

namespace {

void check_inner(Index lhs, Index rhs, const char* what) {
  if (lhs != rhs) throw ValidationError(std::string(what) + ": inner dimensions do not agree");
}

}  // namespace

namespace reference {

Eigen::MatrixXd multiply(const MatRef& a, const MatRef& b) {
  check_inner(a.cols(), b.rows(), "multiply");
  Eigen::MatrixXd out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd multiply_transposed(const MatRef& a, const MatRef& b) {
  check_inner(a.cols(), b.cols(), "multiply_transposed");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd transposed_multiply(const MatRef& a, const MatRef& b) {
  check_inner(a.rows(), b.rows(), "transposed_multiply");
  Eigen::MatrixXd out(a.cols(), b.cols());
  for (Index i = 0; i < a.cols(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd threshold(const MatRef& m, double alpha) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) >= alpha ? m(i, j) : 0.0;
  return out;
}

std::vector<ColumnMatch> correlation_matches(const MatRef& truth, const MatRef& estimate) {
  check_inner(truth.rows(), estimate.rows(), "correlation_matches");
  std::vector<ColumnMatch> out(static_cast<std::size_t>(truth.cols()));
  for (Index i = 0; i < truth.cols(); ++i) {
    ColumnMatch best;
    double truth_sq = 0.0;
    for (Index w = 0; w < truth.rows(); ++w) truth_sq += truth(w, i) * truth(w, i);
    best.error = std::sqrt(truth_sq);
    bool found = false;
    for (Index j = 0; j < estimate.cols(); ++j) {
      double dot = 0.0;
      double norm_sq = 0.0;
      for (Index w = 0; w < truth.rows(); ++w) {
        dot += estimate(w, j) * truth(w, i);
        norm_sq += estimate(w, j) * estimate(w, j);
      }
      if (norm_sq == 0.0) continue;
      const double scale = dot / norm_sq;
      double resid = 0.0;
      for (Index w = 0; w < truth.rows(); ++w) {
        const double d = truth(w, i) - scale * estimate(w, j);
        resid += d * d;
      }
      const double err = std::sqrt(resid);
      if (!found || err < best.error) {
        best = {err, j, scale};
        found = true;
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace reference

namespace parallel {

Eigen::MatrixXd multiply(const MatRef& a, const MatRef& b) {
  check_inner(a.cols(), b.rows(), "multiply");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), b.cols());
  const Index inner = a.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < b.cols(); ++j) {
    double* dst = out.col(j).data();
    for (Index k = 0; k < inner; ++k) {
      const double s = b(k, j);
      if (s == 0.0) continue;
      const double* src = a.col(k).data();
      for (Index i = 0; i < a.rows(); ++i) dst[i] += src[i] * s;
    }
  }
  return out;
}

Eigen::MatrixXd multiply_transposed(const MatRef& a, const MatRef& b) {
  check_inner(a.cols(), b.cols(), "multiply_transposed");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), b.rows());
  const Index inner = a.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < b.rows(); ++j) {
    double* dst = out.col(j).data();
    for (Index k = 0; k < inner; ++k) {
      const double s = b(j, k);
      if (s == 0.0) continue;
      const double* src = a.col(k).data();
      for (Index i = 0; i < a.rows(); ++i) dst[i] += src[i] * s;
    }
  }
  return out;
}

Eigen::MatrixXd transposed_multiply(const MatRef& a, const MatRef& b) {
  check_inner(a.rows(), b.rows(), "transposed_multiply");
  Eigen::MatrixXd out(a.cols(), b.cols());
  const Index inner = a.rows();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < b.cols(); ++j) {
    const double* bj = b.col(j).data();
    for (Index i = 0; i < a.cols(); ++i) {
      const double* ai = a.col(i).data();
      double s = 0.0;
      for (Index k = 0; k < inner; ++k) s += ai[k] * bj[k];
      out(i, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd threshold(const MatRef& m, double alpha) {
  Eigen::MatrixXd out(m.rows(), m.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out(i, j) = m(i, j) >= alpha ? m(i, j) : 0.0;
  return out;
}

std::vector<ColumnMatch> correlation_matches(const MatRef& truth, const MatRef& estimate) {
  check_inner(truth.rows(), estimate.rows(), "correlation_matches");
  const Index rows = truth.rows();
  std::vector<double> norm_sq(static_cast<std::size_t>(estimate.cols()));
  for (Index j = 0; j < estimate.cols(); ++j) {
    const double* e = estimate.col(j).data();
    double s = 0.0;
    for (Index w = 0; w < rows; ++w) s += e[w] * e[w];
    norm_sq[static_cast<std::size_t>(j)] = s;
  }

  std::vector<ColumnMatch> out(static_cast<std::size_t>(truth.cols()));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < truth.cols(); ++i) {
    const double* t = truth.col(i).data();
    double truth_sq = 0.0;
    for (Index w = 0; w < rows; ++w) truth_sq += t[w] * t[w];
    ColumnMatch best{std::sqrt(truth_sq), -1, 0.0};
    for (Index j = 0; j < estimate.cols(); ++j) {
      const double nsq = norm_sq[static_cast<std::size_t>(j)];
      if (nsq == 0.0) continue;
      const double* e = estimate.col(j).data();
      double dot = 0.0;
      for (Index w = 0; w < rows; ++w) dot += e[w] * t[w];
      const double scale = dot / nsq;
      double resid = 0.0;
      for (Index w = 0; w < rows; ++w) {
        const double d = t[w] - scale * e[w];
        resid += d * d;
      }
      const double err = std::sqrt(resid);
      if (best.column < 0 || err < best.error) best = {err, j, scale};
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace parallel

int max_threads() {
#ifdef ANDNMF_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef ANDNMF_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace andnmf::kernels
