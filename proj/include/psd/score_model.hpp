#pragma once

#include "psd/types.hpp"

#include <concepts>
#include <functional>
#include <memory>
#include <span>
#include <utility>

namespace psd {

/// A target known only through u(x) = grad log p(x). `score` writes d entries.
template <class M>
concept ScoreModel = requires(const M& m, std::span<const double> x, std::span<double> out) {
  { m.dimension() } -> std::convertible_to<int>;
  m.score(x, out);
};

/// A score model that also exposes an unnormalized log density.
template <class M>
concept LogDensityModel = ScoreModel<M> && requires(const M& m, std::span<const double> x) {
  { m.log_density(x) } -> std::convertible_to<double>;
};

/// Type-erased score model, for runtime-selected targets.
class AnyScoreModel {
 public:
  using ScoreFn = std::function<void(std::span<const double>, std::span<double>)>;
  using LogDensityFn = std::function<double(std::span<const double>)>;

  AnyScoreModel(int dimension, ScoreFn score, LogDensityFn log_density = {})
      : dimension_(dimension), score_(std::move(score)), log_density_(std::move(log_density)) {}

  template <ScoreModel M>
  explicit AnyScoreModel(M model) : dimension_(model.dimension()) {
    auto shared = std::make_shared<const M>(std::move(model));
    score_ = [shared](std::span<const double> x, std::span<double> out) { shared->score(x, out); };
    if constexpr (LogDensityModel<M>)
      log_density_ = [shared](std::span<const double> x) { return shared->log_density(x); };
  }

  [[nodiscard]] int dimension() const noexcept { return dimension_; }
  void score(std::span<const double> x, std::span<double> out) const { score_(x, out); }
  [[nodiscard]] bool has_log_density() const noexcept { return static_cast<bool>(log_density_); }
  [[nodiscard]] double log_density(std::span<const double> x) const {
    require(has_log_density(), "AnyScoreModel: no log density available");
    return log_density_(x);
  }

 private:
  int dimension_;
  ScoreFn score_;
  LogDensityFn log_density_;
};

/// Evaluates the score at every row of `samples` into an n x d buffer.
template <ScoreModel M>
Samples score_matrix(const Samples& samples, const M& model) {
  require(samples.cols() == model.dimension(), "score_matrix: sample dimension does not match model");
  Samples scores(samples.rows(), samples.cols());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    std::span<double> out(scores.data() + i * scores.cols(), static_cast<std::size_t>(scores.cols()));
    model.score(row_span(samples, i), out);
  }
  return scores;
}

}  // namespace psd
