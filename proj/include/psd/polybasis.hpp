#pragma once

#include "psd/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace psd {

/// Exponent vector of one monomial x^alpha.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    for (int a : exponents_) require(a >= 0, "MultiIndex: negative exponent");
    degree_ = std::accumulate(exponents_.begin(), exponents_.end(), 0);
  }

  [[nodiscard]] const std::vector<int>& exponents() const noexcept { return exponents_; }
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return exponents_[i]; }
  [[nodiscard]] std::size_t dimension() const noexcept { return exponents_.size(); }
  [[nodiscard]] int degree() const noexcept { return degree_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Value, gradient and Laplacian of a monomial at one point.
struct MonomialEval {
  double value = 0.0;
  Vector gradient;
  double laplacian = 0.0;
};

namespace detail {

inline double ipow(double x, int p) noexcept {
  double out = 1.0;
  for (int k = 0; k < p; ++k) out *= x;
  return out;
}

}  // namespace detail

/// Evaluates x^alpha with its gradient and Laplacian. Zero exponents are
/// skipped before any power is formed, so x[i] = 0 never divides.
inline MonomialEval eval_monomial(const MultiIndex& alpha, std::span<const double> x) {
  const std::size_t d = alpha.dimension();
  require(x.size() == d, "eval_monomial: dimension mismatch");

  // powers[i][p] = x[i]^(alpha_i - p) for p = 0, 1, 2 (zero when the exponent goes negative)
  std::vector<std::array<double, 3>> powers(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (int p = 0; p < 3; ++p) {
      const int e = alpha[i] - p;
      powers[i][p] = e < 0 ? 0.0 : detail::ipow(x[i], e);
    }
  }

  MonomialEval out;
  out.gradient = Vector::Zero(static_cast<Eigen::Index>(d));
  out.value = 1.0;
  for (std::size_t i = 0; i < d; ++i) out.value *= powers[i][0];

  for (std::size_t i = 0; i < d; ++i) {
    const int a = alpha[i];
    if (a == 0) continue;
    double rest = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      if (j != i) rest *= powers[j][0];
    out.gradient[static_cast<Eigen::Index>(i)] = a * powers[i][1] * rest;
    if (a >= 2) out.laplacian += a * (a - 1) * powers[i][2] * rest;
  }
  return out;
}

/// Monomials of total degree 1..r in d variables.
///
/// Graded lexicographic ordering: by degree, then lexicographically
/// descending in the exponent vector, so for d = 2, r = 2 the order is
/// x1, x2, x1^2, x1 x2, x2^2. With interactions disabled only pure powers
/// x_i^m are kept (d * r members).
class PolynomialBasis {
 public:
  PolynomialBasis(int dimension, int order, bool include_interactions = true)
      : dimension_(dimension), order_(order), include_interactions_(include_interactions) {
    require(dimension >= 1, "PolynomialBasis: dimension must be >= 1");
    require(order >= 1, "PolynomialBasis: order must be >= 1");
    std::vector<int> current(static_cast<std::size_t>(dimension), 0);
    for (int deg = 1; deg <= order; ++deg) {
      if (include_interactions) {
        enumerate(current, 0, deg);
      } else {
        for (int i = 0; i < dimension; ++i) {
          std::vector<int> e(static_cast<std::size_t>(dimension), 0);
          e[static_cast<std::size_t>(i)] = deg;
          indices_.emplace_back(std::move(e));
        }
      }
    }
  }

  [[nodiscard]] int dimension() const noexcept { return dimension_; }
  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] bool include_interactions() const noexcept { return include_interactions_; }
  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
  [[nodiscard]] const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  [[nodiscard]] const MultiIndex& operator[](std::size_t k) const noexcept { return indices_[k]; }

  /// C(d + r, d) - 1, the size of the full basis.
  static std::uint64_t full_size(int dimension, int order) {
    std::uint64_t c = 1;
    for (int k = 1; k <= dimension; ++k)
      c = c * static_cast<std::uint64_t>(order + k) / static_cast<std::uint64_t>(k);
    return c - 1;
  }

 private:
  // Distributes `remaining` units over coordinates pos.., largest first.
  void enumerate(std::vector<int>& current, std::size_t pos, int remaining) {
    if (pos + 1 == current.size()) {
      current[pos] = remaining;
      indices_.emplace_back(current);
      current[pos] = 0;
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      current[pos] = a;
      enumerate(current, pos + 1, remaining - a);
    }
    current[pos] = 0;
  }

  int dimension_;
  int order_;
  bool include_interactions_;
  std::vector<MultiIndex> indices_;
};

}  // namespace psd
