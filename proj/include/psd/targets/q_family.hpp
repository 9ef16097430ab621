#pragma once

#include "psd/random.hpp"
#include "psd/types.hpp"

#include <cmath>
#include <random>
#include <variant>

namespace psd {

/// N(mean, covariance).
struct GaussianFamily {
  Vector mean;
  Matrix covariance;
};

/// Standard multivariate t with `dof` degrees of freedom.
struct StudentTFamily {
  double dof = 5.0;
};

/// Product of independent Laplace(0, scale) coordinates (variance 2 scale^2).
struct LaplaceProductFamily {
  double scale = 1.0 / std::sqrt(2.0);
};

using QFamily = std::variant<GaussianFamily, StudentTFamily, LaplaceProductFamily>;

/// Gaussian with identity covariance except Sigma_11 = var11.
inline GaussianFamily variance_perturbed_gaussian(int d, double var11) {
  Matrix cov = Matrix::Identity(d, d);
  cov(0, 0) = var11;
  return {Vector::Zero(d), cov};
}

/// n i.i.d. draws in dimension d.
inline Samples sample_q_family(const QFamily& family, Eigen::Index n, int d, std::uint64_t seed) {
  require(n >= 1 && d >= 1, "sample_q_family: n and d must be positive");
  Engine rng = make_engine(seed, 0);
  std::normal_distribution<double> normal;
  Samples out(n, d);
  if (const auto* g = std::get_if<GaussianFamily>(&family)) {
    require(g->mean.size() == d && g->covariance.rows() == d && g->covariance.cols() == d,
            "sample_q_family: gaussian parameters do not match d");
    Eigen::LLT<Matrix> llt(g->covariance);
    require(llt.info() == Eigen::Success, "sample_q_family: covariance is not positive definite");
    const Matrix l = llt.matrixL();
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (auto& v : z) v = normal(rng);
      out.row(i) = (g->mean + l * z).transpose();
    }
  } else if (const auto* t = std::get_if<StudentTFamily>(&family)) {
    require(t->dof > 0.0, "sample_q_family: degrees of freedom must be positive");
    std::chi_squared_distribution<double> chi2(t->dof);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = std::sqrt(t->dof / chi2(rng));
      for (int j = 0; j < d; ++j) out(i, j) = normal(rng) * scale;
    }
  } else {
    const double scale = std::get<LaplaceProductFamily>(family).scale;
    require(scale > 0.0, "sample_q_family: laplace scale must be positive");
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) out(i, j) = scale * (expo(rng) - expo(rng));
  }
  return out;
}

}  // namespace psd
