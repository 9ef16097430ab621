#pragma once

#include "psd/random.hpp"
#include "psd/types.hpp"

#include <cmath>
#include <random>
#include <span>

namespace psd {

namespace detail {

inline double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace detail

/// Gaussian-Bernoulli RBM with marginal
///   log p(x) = b.x - |x|^2 / 2 + sum_j softplus((B^T x)_j + c_j) + const.
class GbRbmTarget {
 public:
  GbRbmTarget(Matrix weights, Vector visible_bias, Vector hidden_bias)
      : weights_(std::move(weights)), b_(std::move(visible_bias)), c_(std::move(hidden_bias)) {
    require(weights_.rows() == b_.size() && weights_.cols() == c_.size(), "GbRbmTarget: parameter shapes disagree");
    require(weights_.allFinite() && b_.allFinite() && c_.allFinite(), "GbRbmTarget: parameters must be finite");
  }

  /// Weights are random signs scaled by 1/sqrt(d_h); biases are standard normal.
  static GbRbmTarget random(int visible, int hidden, std::uint64_t seed) {
    require(visible >= 1 && hidden >= 1, "GbRbmTarget: dimensions must be positive");
    Engine rng = make_engine(seed, 0);
    std::normal_distribution<double> normal;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    Matrix w(visible, hidden);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = ((rng() >> 63) ? scale : -scale);
    Vector b(visible), c(hidden);
    for (auto& v : b) v = normal(rng);
    for (auto& v : c) v = normal(rng);
    return {std::move(w), std::move(b), std::move(c)};
  }

  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(b_.size()); }
  [[nodiscard]] int hidden_dimension() const noexcept { return static_cast<int>(c_.size()); }
  [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
  [[nodiscard]] const Vector& visible_bias() const noexcept { return b_; }
  [[nodiscard]] const Vector& hidden_bias() const noexcept { return c_; }

  /// b - x + B sigmoid(B^T x + c)
  void score(std::span<const double> x, std::span<double> out) const {
    Eigen::Map<const Vector> xv(x.data(), dimension());
    Eigen::Map<Vector> ov(out.data(), dimension());
    Vector act = weights_.transpose() * xv + c_;
    for (auto& a : act) a = detail::sigmoid(a);
    ov.noalias() = b_ - xv + weights_ * act;
  }

  [[nodiscard]] double log_density(std::span<const double> x) const {
    Eigen::Map<const Vector> xv(x.data(), dimension());
    const Vector act = weights_.transpose() * xv + c_;
    double s = b_.dot(xv) - 0.5 * xv.squaredNorm();
    for (double a : act) s += detail::softplus(a);
    return s;
  }

 private:
  Matrix weights_;
  Vector b_;
  Vector c_;
};

/// Copy of `target` with weights B + E, E_ij ~ N(0, sigma^2). Biases unchanged.
inline GbRbmTarget perturb_rbm(const GbRbmTarget& target, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0, "perturb_rbm: sigma must be non-negative");
  Matrix w = target.weights();
  if (sigma > 0.0) {
    Engine rng = make_engine(seed, 1);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) += normal(rng);
  }
  return {std::move(w), target.visible_bias(), target.hidden_bias()};
}

/// Block Gibbs sampling h | x ~ Bernoulli(sigmoid(B^T x + c)),
/// x | h ~ N(b + B h, I). One chain, thinning 1, started from x = b.
inline Samples rbm_gibbs_sample(const GbRbmTarget& target, Eigen::Index n, Eigen::Index burn_in,
                                std::uint64_t seed) {
  require(n >= 1 && burn_in >= 0, "rbm_gibbs_sample: invalid counts");
  Engine rng = make_engine(seed, 2);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const Matrix& w = target.weights();
  Vector x = target.visible_bias();
  Vector h(target.hidden_dimension());
  Samples out(n, target.dimension());
  for (Eigen::Index t = 0; t < burn_in + n; ++t) {
    const Vector act = w.transpose() * x + target.hidden_bias();
    for (Eigen::Index j = 0; j < h.size(); ++j) h[j] = uniform(rng) < detail::sigmoid(act[j]) ? 1.0 : 0.0;
    x = target.visible_bias() + w * h;
    for (auto& v : x) v += normal(rng);
    if (t >= burn_in) out.row(t - burn_in) = x.transpose();
  }
  return out;
}

/// n independent block Gibbs chains advanced together, each started at
/// b + N(0, I); row i is the state of chain i after `sweeps` sweeps. Gives
/// independent draws, unlike a single thinned chain.
inline Samples rbm_gibbs_sample_chains(const GbRbmTarget& target, Eigen::Index n, Eigen::Index sweeps,
                                       std::uint64_t seed) {
  require(n >= 1 && sweeps >= 1, "rbm_gibbs_sample_chains: invalid counts");
  Engine rng = make_engine(seed, 3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const Matrix& w = target.weights();
  const Eigen::RowVectorXd b = target.visible_bias().transpose();
  const Eigen::RowVectorXd c = target.hidden_bias().transpose();
  Matrix x(n, target.dimension());
  Matrix h(n, target.hidden_dimension());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = b[j] + normal(rng);
  for (Eigen::Index s = 0; s < sweeps; ++s) {
    Matrix act = x * w;
    act.rowwise() += c;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      for (Eigen::Index i = 0; i < n; ++i) h(i, j) = uniform(rng) < detail::sigmoid(act(i, j)) ? 1.0 : 0.0;
    x.noalias() = h * w.transpose();
    x.rowwise() += b;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) += normal(rng);
  }
  return Samples(x);
}

}  // namespace psd
