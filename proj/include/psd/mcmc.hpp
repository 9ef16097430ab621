#pragma once

#include "psd/random.hpp"
#include "psd/score_model.hpp"
#include "psd/targets/mixture.hpp"
#include "psd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace psd {

struct SgldConfig {
  double step = 0.005;
  std::size_t batch_size = 5;
  Eigen::Index samples = 10000;  // retained iterates
  Eigen::Index burn_in = -1;     // negative: 10% of the retained count
  std::uint64_t seed = 0;
  Vector init = Vector::Zero(2);
  bool metropolis_correction = false;  // only for cross-checking against MALA
};

struct ChainResult {
  Samples samples;
  double acceptance_rate = 1.0;
};

namespace detail {

inline Eigen::Index resolve_burn_in(Eigen::Index burn_in, Eigen::Index samples) {
  return burn_in >= 0 ? burn_in : samples / 10;
}

inline void check_finite_state(const Vector& theta, Eigen::Index step) {
  if (!theta.allFinite()) throw Error("sampler diverged at step " + std::to_string(step));
}

// log q(to | from) up to a constant for the Langevin proposal with drift grad.
inline double langevin_log_proposal(const Vector& to, const Vector& from, const Vector& grad, double step) {
  return -(to - from - 0.5 * step * grad).squaredNorm() / (2.0 * step);
}

template <LogDensityModel M>
Vector full_score(const M& model, const Vector& theta) {
  Vector g(theta.size());
  model.score({theta.data(), static_cast<std::size_t>(theta.size())}, {g.data(), static_cast<std::size_t>(g.size())});
  return g;
}

template <LogDensityModel M>
double log_density_at(const M& model, const Vector& theta) {
  return model.log_density({theta.data(), static_cast<std::size_t>(theta.size())});
}

}  // namespace detail

/// Stochastic gradient Langevin dynamics on the mixture posterior:
///   theta += (step/2) (grad log prior + (N/B) sum_batch grad log lik) + N(0, step I)
/// Minibatches are drawn without replacement from a permutation reshuffled
/// each epoch.
inline ChainResult sgld_sample(const MixturePosteriorTarget& target, const SgldConfig& config) {
  require(config.step > 0.0, "sgld_sample: step size must be positive");
  require(config.batch_size >= 1 && config.batch_size <= target.data_size(),
          "sgld_sample: batch size must lie in [1, N]");
  require(config.samples >= 1, "sgld_sample: need at least one sample");
  require(config.init.size() == 2, "sgld_sample: initial state must be two-dimensional");

  const Eigen::Index burn_in = detail::resolve_burn_in(config.burn_in, config.samples);
  Engine noise_rng = make_engine(config.seed, 0);
  Engine batch_rng = make_engine(config.seed, 1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const std::size_t n_data = target.data_size();
  std::vector<std::size_t> order(n_data);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = n_data;
  const double scale = static_cast<double>(n_data) / static_cast<double>(config.batch_size);
  const double noise_sd = std::sqrt(config.step);

  Vector theta = config.init;
  Vector grad(2), proposal(2);
  Samples out(config.samples, 2);
  std::size_t accepted = 0, proposed = 0;

  auto stochastic_grad = [&](const Vector& at) {
    Vector lik = Vector::Zero(2);
    std::span<const double> at_span(at.data(), 2);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      if (cursor == n_data) {
        std::shuffle(order.begin(), order.end(), batch_rng);
        cursor = 0;
      }
      target.add_likelihood_score(order[cursor++], at_span, {lik.data(), 2});
    }
    Vector g(2);
    target.prior_score(at_span, {g.data(), 2});
    return Vector(g + scale * lik);
  };

  for (Eigen::Index t = 0; t < burn_in + config.samples; ++t) {
    grad = stochastic_grad(theta);
    for (Eigen::Index j = 0; j < 2; ++j) proposal[j] = theta[j] + 0.5 * config.step * grad[j] + noise_sd * normal(noise_rng);
    detail::check_finite_state(proposal, t);
    if (config.metropolis_correction) {
      const Vector grad_new = detail::full_score(target, proposal);
      const double log_ratio = detail::log_density_at(target, proposal) - detail::log_density_at(target, theta) +
                               detail::langevin_log_proposal(theta, proposal, grad_new, config.step) -
                               detail::langevin_log_proposal(proposal, theta, grad, config.step);
      ++proposed;
      if (std::log(uniform(noise_rng)) < log_ratio) {
        theta = proposal;
        ++accepted;
      }
    } else {
      theta = proposal;
    }
    if (t >= burn_in) out.row(t - burn_in) = theta.transpose();
  }
  return {std::move(out), proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0};
}

struct MalaConfig {
  double step = 0.01;
  Eigen::Index samples = 10000;
  Eigen::Index burn_in = -1;  // negative: 10% of the retained count
  std::uint64_t seed = 0;
  Vector init;                // empty: origin
};

/// Metropolis-adjusted Langevin algorithm with proposal
/// theta' = theta + (step/2) grad log pi(theta) + sqrt(step) zeta.
template <LogDensityModel M>
ChainResult mala_sample(const M& target, const MalaConfig& config) {
  require(config.step > 0.0, "mala_sample: step size must be positive");
  require(config.samples >= 1, "mala_sample: need at least one sample");
  const Eigen::Index d = target.dimension();
  Vector theta = config.init.size() ? config.init : Vector::Zero(d);
  require(theta.size() == d, "mala_sample: initial state has wrong dimension");

  const Eigen::Index burn_in = detail::resolve_burn_in(config.burn_in, config.samples);
  Engine noise_rng = make_engine(config.seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const double noise_sd = std::sqrt(config.step);

  Vector grad = detail::full_score(target, theta);
  double logp = detail::log_density_at(target, theta);
  Vector proposal(d);
  Samples out(config.samples, d);
  std::size_t accepted = 0;

  for (Eigen::Index t = 0; t < burn_in + config.samples; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) proposal[j] = theta[j] + 0.5 * config.step * grad[j] + noise_sd * normal(noise_rng);
    detail::check_finite_state(proposal, t);
    const Vector grad_new = detail::full_score(target, proposal);
    const double logp_new = detail::log_density_at(target, proposal);
    const double log_ratio = logp_new - logp + detail::langevin_log_proposal(theta, proposal, grad_new, config.step) -
                             detail::langevin_log_proposal(proposal, theta, grad, config.step);
    if (std::log(uniform(noise_rng)) < log_ratio) {
      theta = proposal;
      grad = grad_new;
      logp = logp_new;
      ++accepted;
    }
    if (t >= burn_in) out.row(t - burn_in) = theta.transpose();
  }
  const double total = static_cast<double>(burn_in + config.samples);
  return {std::move(out), static_cast<double>(accepted) / total};
}

/// Picks the step from `grid` whose pilot-run acceptance rate is closest to 0.574.
template <LogDensityModel M>
double tune_mala_step(const M& target, const std::vector<double>& grid, Eigen::Index pilot_samples,
                      std::uint64_t seed, const Vector& init = {}) {
  require(!grid.empty(), "tune_mala_step: empty grid");
  double best = grid.front(), best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    MalaConfig cfg{grid[i], pilot_samples, 0, derive_seed(seed, i), init};
    const double gap = std::abs(mala_sample(target, cfg).acceptance_rate - 0.574);
    if (gap < best_gap) {
      best_gap = gap;
      best = grid[i];
    }
  }
  return best;
}

}  // namespace psd
