#pragma once

#include "psd/random.hpp"
#include "psd/types.hpp"

#include <cmath>
#include <random>
#include <span>

namespace psd {

/// Multivariate normal target N(mean, covariance).
class GaussianTarget {
 public:
  GaussianTarget(Vector mean, Matrix covariance) : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    require(covariance_.rows() == covariance_.cols(), "GaussianTarget: covariance is not square");
    require(covariance_.rows() == mean_.size(), "GaussianTarget: mean/covariance size mismatch");
    require(covariance_.isApprox(covariance_.transpose(), 1e-12), "GaussianTarget: covariance is not symmetric");
    llt_.compute(covariance_);
    require(llt_.info() == Eigen::Success, "GaussianTarget: covariance is not positive definite");
    precision_ = llt_.solve(Matrix::Identity(mean_.size(), mean_.size()));
    precision_ = 0.5 * (precision_ + precision_.transpose());
  }

  static GaussianTarget standard(int d) { return {Vector::Zero(d), Matrix::Identity(d, d)}; }

  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(mean_.size()); }
  [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
  [[nodiscard]] const Matrix& covariance() const noexcept { return covariance_; }
  [[nodiscard]] const Matrix& precision() const noexcept { return precision_; }

  /// -Sigma^{-1} (x - mu)
  void score(std::span<const double> x, std::span<double> out) const {
    Eigen::Map<const Vector> xv(x.data(), dimension());
    Eigen::Map<Vector> ov(out.data(), dimension());
    ov.noalias() = -precision_ * (xv - mean_);
  }

  /// Log density without the normalizing constant.
  [[nodiscard]] double log_density(std::span<const double> x) const {
    Eigen::Map<const Vector> xv(x.data(), dimension());
    const Vector diff = xv - mean_;
    return -0.5 * diff.dot(precision_ * diff);
  }

  /// Draws n i.i.d. samples.
  [[nodiscard]] Samples sample(Eigen::Index n, Engine& rng) const {
    std::normal_distribution<double> normal;
    const Matrix l = llt_.matrixL();
    Samples out(n, dimension());
    Vector z(dimension());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (auto& zi : z) zi = normal(rng);
      out.row(i) = (mean_ + l * z).transpose();
    }
    return out;
  }

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix precision_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace psd
