#pragma once

#include "psd/random.hpp"
#include "psd/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace psd {

/// Posterior over theta = (theta1, theta2) for the two-component mixture
///   x_i ~ 0.5 N(theta1, sx2) + 0.5 N(theta1 + theta2, sx2),
/// with independent priors theta1 ~ N(0, s12), theta2 ~ N(0, s22).
class MixturePosteriorTarget {
 public:
  struct Params {
    double prior_var1 = 10.0;
    double prior_var2 = 1.0;
    double component_var = 2.0;
  };

  MixturePosteriorTarget(std::vector<double> data, Params params) : data_(std::move(data)), params_(params) {
    require(params_.prior_var1 > 0.0 && params_.prior_var2 > 0.0 && params_.component_var > 0.0,
            "MixturePosteriorTarget: variances must be positive");
  }

  static constexpr std::uint64_t kDatasetSeed = 1656;
  static constexpr int kDatasetSize = 100;

  /// The fixed dataset: 100 draws with theta1 = 0, theta2 = 1.
  static std::vector<double> standard_dataset() {
    Engine rng = make_engine(kDatasetSeed, 0);
    std::normal_distribution<double> normal(0.0, std::sqrt(Params{}.component_var));
    std::bernoulli_distribution coin(0.5);
    std::vector<double> x(kDatasetSize);
    for (auto& v : x) v = (coin(rng) ? 1.0 : 0.0) + normal(rng);
    return x;
  }

  static MixturePosteriorTarget standard() { return {standard_dataset(), Params{}}; }

  [[nodiscard]] int dimension() const noexcept { return 2; }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
  [[nodiscard]] std::size_t data_size() const noexcept { return data_.size(); }
  [[nodiscard]] const Params& params() const noexcept { return params_; }

  void prior_score(std::span<const double> theta, std::span<double> out) const {
    out[0] = -theta[0] / params_.prior_var1;
    out[1] = -theta[1] / params_.prior_var2;
  }

  /// Adds grad log p(x_i | theta) to `out`.
  void add_likelihood_score(std::size_t i, std::span<const double> theta, std::span<double> out) const {
    const double s = params_.component_var;
    const double ea = data_[i] - theta[0];
    const double eb = data_[i] - theta[0] - theta[1];
    const double la = -0.5 * ea * ea / s;
    const double lb = -0.5 * eb * eb / s;
    const double mx = std::max(la, lb);
    const double wa = std::exp(la - mx);
    const double wb = std::exp(lb - mx);
    const double ra = wa / (wa + wb);
    const double rb = 1.0 - ra;
    out[0] += (ra * ea + rb * eb) / s;
    out[1] += rb * eb / s;
  }

  void score(std::span<const double> theta, std::span<double> out) const {
    prior_score(theta, out);
    for (std::size_t i = 0; i < data_.size(); ++i) add_likelihood_score(i, theta, out);
  }

  /// Unnormalised log posterior.
  [[nodiscard]] double log_density(std::span<const double> theta) const {
    const double s = params_.component_var;
    double lp = -0.5 * theta[0] * theta[0] / params_.prior_var1 - 0.5 * theta[1] * theta[1] / params_.prior_var2;
    for (double x : data_) {
      const double ea = x - theta[0];
      const double eb = x - theta[0] - theta[1];
      const double la = -0.5 * ea * ea / s;
      const double lb = -0.5 * eb * eb / s;
      const double mx = std::max(la, lb);
      lp += mx + std::log(0.5 * std::exp(la - mx) + 0.5 * std::exp(lb - mx));
    }
    return lp;
  }

 private:
  std::vector<double> data_;
  Params params_;
};

}  // namespace psd
