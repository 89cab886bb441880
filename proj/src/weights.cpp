#include "andnmf/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "andnmf/errors.hpp"
#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"
#include "andnmf/rng.hpp"

namespace andnmf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kRangeSlack = 1e-9;

// Fills the first `support` slots of `idx` with a uniform random subset
// (partial Fisher-Yates).
void random_support(Rng& rng, std::vector<Index>& idx, Index support) {
  std::iota(idx.begin(), idx.end(), Index{0});
  const auto d = static_cast<std::uint64_t>(idx.size());
  for (Index i = 0; i < support; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const auto pick = u + rng.below(d - u);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick)]);
  }
}

// Symmetric square root factor L with L L^T = cov; tolerates PSD-singular cov.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("logistic-normal covariance eigensolve failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

WeightSpec WeightSpec::sparse_binary(Index dimension, Index support, std::uint64_t seed) {
  return {SparseBinary{support}, dimension, seed};
}

WeightSpec WeightSpec::dirichlet(Index dimension, double alpha, std::uint64_t seed) {
  return {Dirichlet{Eigen::VectorXd::Constant(std::max<Index>(dimension, 0), alpha)}, dimension, seed};
}

WeightSpec WeightSpec::logistic_normal(Index dimension, double rho, std::uint64_t seed) {
  const Index d = std::max<Index>(dimension, 0);
  Eigen::MatrixXd cov(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) cov(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return {LogisticNormal{Eigen::VectorXd::Zero(d), cov}, dimension, seed};
}

WeightSpec WeightSpec::sparse_uniform(Index dimension, Index support, double floor, double ceiling,
                                      std::uint64_t seed) {
  return {SparseUniform{support, floor, ceiling}, dimension, seed};
}

std::string WeightSpec::family_name() const {
  return std::visit(overloaded{[](const SparseBinary&) { return std::string("sparse_binary"); },
                               [](const Dirichlet&) { return std::string("dirichlet"); },
                               [](const LogisticNormal&) { return std::string("logistic_normal"); },
                               [](const SparseUniform&) { return std::string("sparse_uniform"); }},
                    family);
}

void validate(const WeightSpec& spec) {
  const Index d = spec.dimension;
  if (d < 1) throw ValidationError("weights: dimension must be >= 1");
  std::visit(
      overloaded{
          [d](const SparseBinary& f) {
            if (f.support < 1 || f.support > d)
              throw ValidationError("sparse_binary: support must satisfy 1 <= s <= D");
          },
          [d](const Dirichlet& f) {
            if (f.concentration.size() != d)
              throw ValidationError("dirichlet: concentration length must equal D");
            for (Index i = 0; i < d; ++i)
              if (!(f.concentration(i) > 0.0) || !std::isfinite(f.concentration(i)))
                throw ValidationError("dirichlet: concentration must be finite and > 0");
          },
          [d](const LogisticNormal& f) {
            if (f.mean.size() != d || f.covariance.rows() != d || f.covariance.cols() != d)
              throw ValidationError("logistic_normal: mean/covariance dimension must equal D");
            if (!f.mean.allFinite() || !f.covariance.allFinite())
              throw ValidationError("logistic_normal: non-finite parameters");
            const double scale = std::max(1.0, f.covariance.cwiseAbs().maxCoeff());
            if ((f.covariance - f.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
              throw ValidationError("logistic_normal: covariance is not symmetric");
            if (dense::min_symmetric_eigenvalue(f.covariance) < -1e-10 * scale)
              throw ValidationError("logistic_normal: covariance is not positive semidefinite");
          },
          [d](const SparseUniform& f) {
            if (f.support < 1 || f.support > d)
              throw ValidationError("sparse_uniform: support must satisfy 1 <= s <= D");
            if (!(f.floor >= 0.0 && f.floor < f.ceiling && f.ceiling <= 1.0))
              throw ValidationError("sparse_uniform: need 0 <= floor < ceiling <= 1");
          }},
      spec.family);
}

DenseMatrix sample_weights(const WeightSpec& spec, Index n) {
  validate(spec);
  if (n < 1) throw ValidationError("sample_weights: n must be >= 1");
  const Index d = spec.dimension;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, n);

  Eigen::MatrixXd factor;
  if (const auto* ln = std::get_if<LogisticNormal>(&spec.family)) factor = covariance_factor(ln->covariance);

#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
    auto col = x.col(j);
    std::visit(
        overloaded{
            [&](const SparseBinary& f) {
              std::vector<Index> idx(static_cast<std::size_t>(d));
              random_support(rng, idx, f.support);
              for (Index i = 0; i < f.support; ++i) col(idx[static_cast<std::size_t>(i)]) = 1.0;
            },
            [&](const SparseUniform& f) {
              std::vector<Index> idx(static_cast<std::size_t>(d));
              random_support(rng, idx, f.support);
              for (Index i = 0; i < f.support; ++i)
                col(idx[static_cast<std::size_t>(i)]) = rng.uniform(f.floor, f.ceiling);
            },
            [&](const Dirichlet& f) {
              // Normalize in log space so tiny concentrations cannot underflow
              // every coordinate to zero.
              Eigen::VectorXd logs(d);
              for (Index i = 0; i < d; ++i) logs(i) = rng.log_gamma_variate(f.concentration(i));
              const double top = logs.maxCoeff();
              double total = 0.0;
              for (Index i = 0; i < d; ++i) {
                col(i) = std::max(std::exp(logs(i) - top), std::numeric_limits<double>::min());
                total += col(i);
              }
              col /= total;
            },
            [&](const LogisticNormal& f) {
              Eigen::VectorXd g(d);
              for (Index i = 0; i < d; ++i) g(i) = rng.normal();
              Eigen::VectorXd eta = f.mean;
              for (Index k = 0; k < d; ++k)
                for (Index i = 0; i < d; ++i) eta(i) += factor(i, k) * g(k);
              const double top = eta.maxCoeff();
              double total = 0.0;
              for (Index i = 0; i < d; ++i) {
                col(i) = std::exp(eta(i) - top);
                total += col(i);
              }
              col /= total;
            }},
        spec.family);
  }
  return DenseMatrix(std::move(x));
}

GccParams gcc_closed_form(const WeightSpec& spec) {
  validate(spec);
  const double d = static_cast<double>(spec.dimension);
  if (const auto* b = std::get_if<SparseBinary>(&spec.family)) {
    const double s = static_cast<double>(b->support);
    return {s, s, s * s, 1.0 - 1.0 / s, std::numeric_limits<double>::infinity()};
  }
  if (const auto* dir = std::get_if<Dirichlet>(&spec.family)) {
    const double a = dir->concentration(0);
    if ((dir->concentration.array() != a).any())
      throw ValidationError("gcc_closed_form: only symmetric Dirichlet has a closed form; use gcc_from_samples");
    const double s = a * d;  // concentration s/D per coordinate
    return {1.0, 1.0, 1.0 / (s * d), 1.0 - 1.0 / s, std::nullopt};
  }
  throw ValidationError("gcc_closed_form: no closed form for " + spec.family_name() +
                        "; use gcc_from_samples");
}

GccEstimate gcc_from_samples(const DenseMatrix& x) {
  const Eigen::MatrixXd& v = x.values();
  std::ostringstream bad;
  Index n_bad = 0;
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) {
      if (v(i, j) < -kRangeSlack || v(i, j) > 1.0 + kRangeSlack) {
        if (n_bad < 10) bad << (n_bad ? ", " : "") << "(" << i << ", " << j << ")=" << v(i, j);
        ++n_bad;
      }
    }
  }
  if (n_bad > 0) {
    std::ostringstream os;
    os << "gcc_from_samples: " << n_bad << " entries outside [0, 1]: " << bad.str()
       << (n_bad > 10 ? ", ..." : "");
    throw ValidationError(os.str());
  }

  const Index d = v.rows();
  const Index n = v.cols();
  const double dd = static_cast<double>(d);
  GccEstimate out;
  out.samples = n;
  out.second_moment = kernels::parallel::multiply_transposed(v, v) / static_cast<double>(n);
  out.mean = v.rowwise().sum() / static_cast<double>(n);
  out.min_eigenvalue = dense::min_symmetric_eigenvalue(out.second_moment);

  const Eigen::MatrixXd& delta = out.second_moment;
  double max_diag = 0.0;
  double max_off = 0.0;
  for (Index i = 0; i < d; ++i) {
    max_diag = std::max(max_diag, delta(i, i));
    for (Index j = 0; j < d; ++j)
      if (i != j) max_off = std::max(max_off, delta(i, j));
  }
  GccParams& p = out.params;
  p.r = v.cwiseAbs().colwise().sum().maxCoeff();
  p.k = 0.5 * dd * max_diag;
  p.m = dd * dd * max_off;
  p.lambda = p.k > 0.0 ? std::max(0.0, dd * out.min_eigenvalue / p.k) : 0.0;
  return out;
}

DecayProfile decay_profile(const DenseMatrix& x, const std::vector<double>& alphas) {
  if (alphas.empty()) throw ValidationError("decay_profile: alphas must not be empty");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("decay_profile: every alpha must lie in (0, 1)");

  const Eigen::MatrixXd& v = x.values();
  DecayProfile out;
  out.rows.reserve(alphas.size());
  for (double a : alphas) out.rows.push_back({a, 0.0});

  for (Index i = 0; i < v.rows(); ++i) {
    std::vector<double> nonzero;
    for (Index j = 0; j < v.cols(); ++j)
      if (v(i, j) != 0.0) nonzero.push_back(v(i, j));
    if (nonzero.empty()) {
      out.skipped_coordinates.push_back(i);
      continue;
    }
    std::sort(nonzero.begin(), nonzero.end());
    const double count = static_cast<double>(nonzero.size());
    const double slack = 2.0 / std::sqrt(count);
    for (std::size_t g = 0; g < alphas.size(); ++g) {
      const double a = alphas[g];
      const auto below = std::upper_bound(nonzero.begin(), nonzero.end(), a) - nonzero.begin();
      const double cdf = static_cast<double>(below) / count;
      out.rows[g].max_conditional_cdf = std::max(out.rows[g].max_conditional_cdf, cdf);
      // cdf - slack <= a^q  <=>  q <= log(cdf - slack) / log(a)
      const double excess = cdf - slack;
      if (excess > 0.0) out.fitted_q = std::min(out.fitted_q, std::log(excess) / std::log(a));
    }
  }
  return out;
}

}  // namespace andnmf
