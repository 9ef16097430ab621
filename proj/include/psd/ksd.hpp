#pragma once

#include "psd/gof_tests.hpp"
#include "psd/random.hpp"
#include "psd/score_model.hpp"
#include "psd/stein.hpp"
#include "psd/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

namespace psd {

/// Inverse multiquadric kernel (c^2 + |x - y|^2)^beta.
struct ImqKernel {
  double c = 1.0;
  double beta = -0.5;
};

/// Gaussian kernel exp(-|x - y|^2 / (2 h^2)).
struct GaussianKernel {
  double bandwidth = 1.0;
};

using BaseKernel = std::variant<ImqKernel, GaussianKernel>;

inline void validate(const BaseKernel& kernel) {
  if (const auto* imq = std::get_if<ImqKernel>(&kernel)) {
    require(imq->c > 0.0, "ImqKernel: c must be positive");
    require(imq->beta > -1.0 && imq->beta < 0.0, "ImqKernel: beta must lie in (-1, 0)");
  } else {
    require(std::get<GaussianKernel>(kernel).bandwidth > 0.0, "GaussianKernel: bandwidth must be positive");
  }
}

/// Stein kernel k0(x, y) given the scores ux = u(x), uy = u(y):
///   div_x div_y k + grad_x k . u(y) + grad_y k . u(x) + k u(x) . u(y)
inline double stein_kernel_from_scores(const double* x, const double* y, const double* ux, const double* uy,
                                       std::size_t d, const BaseKernel& kernel) {
  double r2 = 0.0, diff_uy = 0.0, diff_ux = 0.0, ux_uy = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = x[i] - y[i];
    r2 += diff * diff;
    diff_uy += diff * uy[i];
    diff_ux += diff * ux[i];
    ux_uy += ux[i] * uy[i];
  }
  const double dd = static_cast<double>(d);
  if (const auto* imq = std::get_if<ImqKernel>(&kernel)) {
    const double beta = imq->beta;
    const double s = imq->c * imq->c + r2;
    const double k = beta == -0.5 ? 1.0 / std::sqrt(s) : std::pow(s, beta);
    const double k1 = k / s;        // s^(beta - 1)
    const double k2 = k1 / s;       // s^(beta - 2)
    const double trace = -4.0 * beta * (beta - 1.0) * r2 * k2 - 2.0 * beta * dd * k1;
    // grad_x k = 2 beta (x - y) s^(beta-1), grad_y k = -grad_x k
    return trace + 2.0 * beta * k1 * (diff_uy - diff_ux) + k * ux_uy;
  }
  const double h = std::get<GaussianKernel>(kernel).bandwidth;
  const double inv_h2 = 1.0 / (h * h);
  const double k = std::exp(-0.5 * r2 * inv_h2);
  const double trace = k * (dd * inv_h2 - r2 * inv_h2 * inv_h2);
  // grad_x k = -(x - y) k / h^2, grad_y k = -grad_x k
  return trace - k * inv_h2 * (diff_uy - diff_ux) + k * ux_uy;
}

template <ScoreModel M>
double stein_kernel(std::span<const double> x, std::span<const double> y, const M& model, const BaseKernel& kernel) {
  require(x.size() == y.size() && static_cast<int>(x.size()) == model.dimension(), "stein_kernel: dimension mismatch");
  std::vector<double> ux(x.size()), uy(y.size());
  model.score(x, ux);
  model.score(y, uy);
  return stein_kernel_from_scores(x.data(), y.data(), ux.data(), uy.data(), x.size(), kernel);
}

namespace detail {

// Sum of k0 over i < j pairs and over the diagonal, streamed row by row.
struct KsdSums {
  double off_diagonal = 0.0;  // sum over i != j
  double diagonal = 0.0;
};

inline KsdSums ksd_sums(const Samples& samples, const Samples& scores, const BaseKernel& kernel) {
  const Eigen::Index n = samples.rows();
  const auto d = static_cast<std::size_t>(samples.cols());
  KsdSums s;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = samples.data() + i * samples.cols();
    const double* ui = scores.data() + i * scores.cols();
    s.diagonal += stein_kernel_from_scores(xi, xi, ui, ui, d, kernel);
    double row = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
      row += stein_kernel_from_scores(xi, samples.data() + j * samples.cols(), ui, scores.data() + j * scores.cols(),
                                      d, kernel);
    s.off_diagonal += 2.0 * row;
  }
  return s;
}

}  // namespace detail

/// Unbiased KSD^2 estimate, O(n^2 d).
template <ScoreModel M>
DiscrepancyEstimate ksd_u_statistic(const Samples& samples, const M& model, const BaseKernel& kernel) {
  require(samples.rows() >= 2, "ksd_u_statistic: need at least two samples");
  validate(kernel);
  const Samples scores = score_matrix(samples, model);
  const auto sums = detail::ksd_sums(samples, scores, kernel);
  const double n = static_cast<double>(samples.rows());
  return {sums.off_diagonal / (n * (n - 1.0)), EstimateKind::USquared, 0, 0, static_cast<std::size_t>(samples.rows())};
}

/// V-statistic KSD^2 estimate including the diagonal.
template <ScoreModel M>
DiscrepancyEstimate ksd_v_statistic(const Samples& samples, const M& model, const BaseKernel& kernel) {
  require(samples.rows() >= 1, "ksd_v_statistic: empty sample");
  validate(kernel);
  const Samples scores = score_matrix(samples, model);
  const auto sums = detail::ksd_sums(samples, scores, kernel);
  const double n = static_cast<double>(samples.rows());
  return {(sums.off_diagonal + sums.diagonal) / (n * n), EstimateKind::VSquared, 0, 0,
          static_cast<std::size_t>(samples.rows())};
}

inline constexpr Eigen::Index kMaxGramSize = 20000;

/// Stein kernel Gram matrix (materialised; n <= 20000).
template <ScoreModel M>
Matrix stein_gram(const Samples& samples, const M& model, const BaseKernel& kernel) {
  validate(kernel);
  const Eigen::Index n = samples.rows();
  require(n <= kMaxGramSize, "stein_gram: sample too large to materialise the Gram matrix");
  const Samples scores = score_matrix(samples, model);
  const auto d = static_cast<std::size_t>(samples.cols());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = samples.data() + i * samples.cols();
    const double* ui = scores.data() + i * scores.cols();
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = stein_kernel_from_scores(xi, samples.data() + j * samples.cols(), ui,
                                                scores.data() + j * scores.cols(), d, kernel);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

inline constexpr Eigen::Index kMedianExactLimit = 5000;
inline constexpr std::size_t kMedianSubsamplePairs = 5000;

/// Bandwidth h with 2 h^2 = median pairwise squared distance. Exact for
/// n <= 5000, otherwise over 5000 seeded random pairs. Even counts take
/// the mean of the two middle values.
inline double median_heuristic(const Samples& samples, std::uint64_t seed = 0) {
  const Eigen::Index n = samples.rows();
  require(n >= 2, "median_heuristic: need at least two samples");
  std::vector<double> d2;
  if (n <= kMedianExactLimit) {
    d2.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) d2.push_back((samples.row(i) - samples.row(j)).squaredNorm());
  } else {
    Engine rng = make_engine(seed, 0);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    while (d2.size() < kMedianSubsamplePairs) {
      const auto i = pick(rng), j = pick(rng);
      if (i != j) d2.push_back((samples.row(i) - samples.row(j)).squaredNorm());
    }
  }
  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid), d2.end());
  double median = d2[mid];
  if (d2.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid)));
  require(median > 0.0, "median_heuristic: all points coincide");
  return std::sqrt(median / 2.0);
}

/// (1/n) eps^T G eps.
inline double gram_replicate(const Matrix& gram, const Vector& signs) {
  return signs.dot(gram * signs) / static_cast<double>(gram.rows());
}

/// Rademacher bootstrap on n KSD^2_v, O(n^2) per replicate.
template <ScoreModel M>
TestOutcome ksd_bootstrap_test(const Samples& samples, const M& model, const BaseKernel& kernel, std::size_t m,
                               double alpha, std::uint64_t seed) {
  require(samples.rows() >= 1, "ksd_bootstrap_test: empty sample");
  require(m >= 1, "ksd_bootstrap_test: need at least one replicate");
  const Matrix gram = stein_gram(samples, model, kernel);
  const Eigen::Index n = gram.rows();
  const double statistic = gram.sum() / static_cast<double>(n);
  std::vector<double> draws(m);
  Vector signs(n);
  for (std::size_t b = 0; b < m; ++b) {
    Engine rng = make_engine(seed, b);
    std::uint64_t bits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i % 64 == 0) bits = rng();
      signs[i] = (bits & 1U) ? 1.0 : -1.0;
      bits >>= 1;
    }
    draws[b] = gram_replicate(gram, signs);
  }
  return decide(statistic, std::move(draws), alpha, TestMethod::RademacherBootstrap);
}

}  // namespace psd
