#pragma once

#include "psd/linalg.hpp"
#include "psd/polybasis.hpp"
#include "psd/score_model.hpp"
#include "psd/targets/gaussian.hpp"
#include "psd/types.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace psd {

/// Stein features tau_k(x_i) = Lap P_k(x_i) + grad P_k(x_i) . u(x_i), one
/// sample per row and one basis member per column.
struct FeatureMatrix {
  Matrix values;  // n x J
  PolynomialBasis basis;

  [[nodiscard]] Eigen::Index rows() const noexcept { return values.rows(); }
  [[nodiscard]] Eigen::Index cols() const noexcept { return values.cols(); }
};

enum class EstimateKind { VSquared, USquared, Population };

inline const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::VSquared: return "v-squared";
    case EstimateKind::USquared: return "u-squared";
    case EstimateKind::Population: return "population";
  }
  return "?";
}

struct DiscrepancyEstimate {
  double value = 0.0;
  EstimateKind kind = EstimateKind::VSquared;
  int order = 0;
  std::size_t basis_size = 0;
  std::size_t sample_size = 0;
};

namespace detail {

// Nonzero exponents of one monomial, so each feature costs O(r^2) rather than O(d^2).
struct SparseMonomial {
  std::vector<std::pair<int, int>> terms;  // (coordinate, exponent)
};

inline std::vector<SparseMonomial> sparse_basis(const PolynomialBasis& basis) {
  std::vector<SparseMonomial> out;
  out.reserve(basis.size());
  for (const auto& alpha : basis.indices()) {
    SparseMonomial m;
    for (std::size_t i = 0; i < alpha.dimension(); ++i)
      if (alpha[i] > 0) m.terms.emplace_back(static_cast<int>(i), alpha[i]);
    out.push_back(std::move(m));
  }
  return out;
}

// Fills `row` (length J) with the Stein features of one point with score `u`.
// `pow` holds x_i^p at pow[i * (r + 1) + p].
inline void stein_row(const std::vector<SparseMonomial>& monomials, int order, const double* x, const double* u,
                      std::vector<double>& pow, double* row, Eigen::Index row_stride, std::size_t d) {
  const int stride = order + 1;
  for (std::size_t i = 0; i < d; ++i) {
    double p = 1.0;
    for (int k = 0; k <= order; ++k) {
      pow[i * stride + k] = p;
      p *= x[i];
    }
  }
  for (std::size_t k = 0; k < monomials.size(); ++k) {
    const auto& terms = monomials[k].terms;
    double acc = 0.0;
    for (std::size_t a = 0; a < terms.size(); ++a) {
      const auto [i, e] = terms[a];
      double rest = 1.0;
      for (std::size_t b = 0; b < terms.size(); ++b) {
        if (b == a) continue;
        rest *= pow[terms[b].first * stride + terms[b].second];
      }
      const double* pi = &pow[i * stride];
      double local = e * pi[e - 1] * u[i];
      if (e >= 2) local += e * (e - 1) * pi[e - 2];
      acc += local * rest;
    }
    row[static_cast<Eigen::Index>(k) * row_stride] = acc;
  }
}

inline void check_finite_scores(const Samples& scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    if (!scores.row(i).allFinite())
      throw Error("stein_features: non-finite score at sample " + std::to_string(i));
}

}  // namespace detail

/// Stein features from precomputed scores (n x d). The score of each sample
/// is read once and shared by all J columns.
inline FeatureMatrix features_from_scores(const Samples& samples, const Samples& scores, const PolynomialBasis& basis) {
  require(samples.cols() == basis.dimension(), "stein_features: basis dimension does not match samples");
  require(scores.rows() == samples.rows() && scores.cols() == samples.cols(), "stein_features: score buffer shape");
  require(samples.allFinite(), "stein_features: samples must be finite");
  detail::check_finite_scores(scores);

  const auto monomials = detail::sparse_basis(basis);
  const auto d = static_cast<std::size_t>(samples.cols());
  FeatureMatrix out{Matrix(samples.rows(), static_cast<Eigen::Index>(basis.size())), basis};
  std::vector<double> pow(d * static_cast<std::size_t>(basis.order() + 1));
  const Eigen::Index n = samples.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::stein_row(monomials, basis.order(), samples.data() + i * samples.cols(),
                      scores.data() + i * scores.cols(), pow, out.values.data() + i, n, d);
  }
  return out;
}

template <ScoreModel M>
FeatureMatrix stein_features(const Samples& samples, const M& model, const PolynomialBasis& basis) {
  require(basis.dimension() == model.dimension(), "stein_features: basis dimension does not match model");
  return features_from_scores(samples, score_matrix(samples, model), basis);
}

/// Stein feature vector tau(x) of a single point.
template <ScoreModel M>
Vector stein_feature_vector(std::span<const double> x, const M& model, const PolynomialBasis& basis) {
  require(static_cast<int>(x.size()) == model.dimension(), "stein_feature_vector: dimension mismatch");
  Samples s = Eigen::Map<const Samples>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  return stein_features(s, model, basis).values.row(0).transpose();
}

/// V-statistic PSD^2_v = sum_k zbar_k^2.
inline DiscrepancyEstimate psd_v_statistic(const FeatureMatrix& f) {
  require(f.rows() >= 1 && f.cols() >= 1, "psd_v_statistic: empty feature matrix");
  const Vector means = f.values.colwise().mean().transpose();
  return {means.squaredNorm(), EstimateKind::VSquared, f.basis.order(), static_cast<std::size_t>(f.cols()),
          static_cast<std::size_t>(f.rows())};
}

/// Unbiased U-statistic (n^2 sum zbar^2 - n sum mean(z^2)) / (n (n - 1)).
inline DiscrepancyEstimate psd_u_statistic(const FeatureMatrix& f) {
  require(f.rows() >= 2, "psd_u_statistic: need at least two samples");
  require(f.cols() >= 1, "psd_u_statistic: empty feature matrix");
  const double n = static_cast<double>(f.rows());
  const Vector sums = f.values.colwise().sum().transpose();
  const double sum_sq = f.values.squaredNorm();
  // n^2 sum zbar^2 = sum_k (col sum)^2 ; n sum mean(z^2) = total sum of squares
  const double value = (sums.squaredNorm() - sum_sq) / (n * (n - 1.0));
  return {value, EstimateKind::USquared, f.basis.order(), static_cast<std::size_t>(f.cols()),
          static_cast<std::size_t>(f.rows())};
}

/// Feature kernel Delta(x, y) = tau(x) . tau(y).
template <ScoreModel M>
double delta_kernel(std::span<const double> x, std::span<const double> y, const M& model,
                    const PolynomialBasis& basis) {
  require(x.size() == y.size(), "delta_kernel: dimension mismatch");
  return stein_feature_vector(x, model, basis).dot(stein_feature_vector(y, model, basis));
}

// ---------------------------------------------------------------------------
// Population PSD for Gaussian Q against Gaussian P (closed-form moments).

namespace detail {

// E[prod_l y_{idx[l]}] for centred Gaussian y with covariance `cov` (Isserlis).
inline double isserlis(const std::vector<int>& idx, const Matrix& cov) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2 == 1) return 0.0;
  double total = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    rest.reserve(idx.size() - 2);
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    total += cov(idx[0], idx[j]) * isserlis(rest, cov);
  }
  return total;
}

// E[x^beta] for x ~ N(mean, cov).
inline double gaussian_moment(const std::vector<int>& beta, const Vector& mean, const Matrix& cov) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < beta.size(); ++i)
    for (int k = 0; k < beta[i]; ++k) idx.push_back(static_cast<int>(i));
  const std::size_t len = idx.size();
  double total = 0.0;
  // x_a = mean_a + y_a; expand the product over subsets taken from the centred part.
  for (std::size_t mask = 0; mask < (std::size_t{1} << len); ++mask) {
    std::vector<int> centred;
    double prefactor = 1.0;
    for (std::size_t l = 0; l < len; ++l) {
      if (mask & (std::size_t{1} << l)) centred.push_back(idx[l]);
      else prefactor *= mean[idx[l]];
    }
    if (prefactor != 0.0) total += prefactor * isserlis(centred, cov);
  }
  return total;
}

}  // namespace detail

/// Population PSD sqrt(sum_k E_Q[A P_k]^2) for Q = N(q_mean, q_cov) and a
/// Gaussian target, using exact Gaussian moments. Supports r <= 4.
inline DiscrepancyEstimate population_psd_gaussian(const Vector& q_mean, const Matrix& q_cov,
                                                   const GaussianTarget& target, const PolynomialBasis& basis) {
  const int d = target.dimension();
  require(basis.order() <= 4, "population_psd_gaussian: order above 4 is not supported");
  require(basis.dimension() == d && q_mean.size() == d && q_cov.rows() == d && q_cov.cols() == d,
          "population_psd_gaussian: dimension mismatch");
  require(q_cov.isApprox(q_cov.transpose(), 1e-12), "population_psd_gaussian: covariance is not symmetric");
  const auto eig = jacobi_eigen(q_cov);
  require(eig.values.minCoeff() >= -1e-10 * std::max(1.0, eig.values.cwiseAbs().maxCoeff()),
          "population_psd_gaussian: covariance is not positive semi-definite");

  const Matrix& prec = target.precision();
  const Vector& mu = target.mean();
  auto moment = [&](std::vector<int> beta) { return detail::gaussian_moment(beta, q_mean, q_cov); };

  double sum_sq = 0.0;
  for (const auto& alpha : basis.indices()) {
    // E_Q[A x^alpha] = sum_i a_i (a_i - 1) E[x^(alpha - 2e_i)]
    //               - sum_i a_i sum_j prec_ij (E[x^(alpha - e_i + e_j)] - mu_j E[x^(alpha - e_i)])
    double z = 0.0;
    for (int i = 0; i < d; ++i) {
      const int a = alpha[static_cast<std::size_t>(i)];
      if (a == 0) continue;
      std::vector<int> beta = alpha.exponents();
      if (a >= 2) {
        beta[static_cast<std::size_t>(i)] -= 2;
        z += a * (a - 1) * moment(beta);
        beta[static_cast<std::size_t>(i)] += 2;
      }
      beta[static_cast<std::size_t>(i)] -= 1;
      const double m_lower = moment(beta);
      for (int j = 0; j < d; ++j) {
        if (prec(i, j) == 0.0) continue;
        beta[static_cast<std::size_t>(j)] += 1;
        const double m_up = moment(beta);
        beta[static_cast<std::size_t>(j)] -= 1;
        z -= a * prec(i, j) * (m_up - mu[j] * m_lower);
      }
    }
    sum_sq += z * z;
  }
  return {std::sqrt(sum_sq), EstimateKind::Population, basis.order(), basis.size(), 0};
}

// ---------------------------------------------------------------------------
// Linear transforms y = W x.

inline constexpr double kMaxTransformCondition = 1e12;

/// Features of y_i = W x_i under the pushforward score W^{-T} u(x_i).
template <ScoreModel M>
FeatureMatrix transformed_features(const Samples& samples, const M& model, const PolynomialBasis& basis,
                                   const Matrix& w) {
  const Eigen::Index d = samples.cols();
  require(w.rows() == d && w.cols() == d, "transformed_features: transform has wrong shape");
  require(condition_number(w) <= kMaxTransformCondition, "transformed_features: transform is near-singular");
  const Samples scores = score_matrix(samples, model);
  detail::check_finite_scores(scores);
  const Matrix w_inv_t = w.inverse().transpose();
  const Samples y = samples * w.transpose();
  const Samples score_y = scores * w_inv_t.transpose();
  return features_from_scores(y, score_y, basis);
}

/// Symmetric inverse square root of the sample covariance, eigenvalues
/// floored at `floor`.
inline Matrix whitening_matrix(const Samples& samples, double floor = 1e-10) {
  require(samples.rows() >= 2, "whitening_matrix: need at least two samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Samples centred = samples.rowwise() - mean;
  const Matrix cov = (centred.transpose() * centred) / static_cast<double>(samples.rows());
  const auto eig = jacobi_eigen(cov);
  const Vector inv_sqrt = eig.values.cwiseMax(floor).cwiseSqrt().cwiseInverse();
  return eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
}

}  // namespace psd
