#include "psd/polybasis.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace psd {
namespace {

std::vector<std::vector<int>> exponents_of(const PolynomialBasis& b) {
  std::vector<std::vector<int>> out;
  for (const auto& a : b.indices()) out.push_back(a.exponents());
  return out;
}

TEST(PolynomialBasis, TwoDimensionalOrderTwo) {
  const PolynomialBasis b(2, 2);
  EXPECT_EQ(exponents_of(b), (std::vector<std::vector<int>>{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}));
  EXPECT_EQ(b.size(), 5u);
}

TEST(PolynomialBasis, SingleMonomial) {
  const PolynomialBasis b(1, 1);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].exponents(), std::vector<int>{1});
}

TEST(PolynomialBasis, NoInteractions) {
  const PolynomialBasis b(3, 2, false);
  EXPECT_EQ(exponents_of(b),
            (std::vector<std::vector<int>>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}}));
}

TEST(PolynomialBasis, RejectsZeroArguments) {
  EXPECT_THROW(PolynomialBasis(0, 2), Error);
  EXPECT_THROW(PolynomialBasis(2, 0), Error);
}

TEST(PolynomialBasis, CardinalityMatchesClosedForm) {
  for (int d = 1; d <= 10; ++d) {
    for (int r = 1; r <= 4; ++r) {
      const PolynomialBasis full(d, r);
      EXPECT_EQ(static_cast<double>(full.size()), oracle::binomial(d + r, d) - 1.0) << d << " " << r;
      EXPECT_EQ(full.size(), PolynomialBasis::full_size(d, r));
      EXPECT_EQ(PolynomialBasis(d, r, false).size(), static_cast<std::size_t>(d * r));
      for (const auto& a : full.indices()) {
        EXPECT_GE(a.degree(), 1);
        EXPECT_LE(a.degree(), r);
      }
    }
  }
}

TEST(PolynomialBasis, GradedAndDeterministic) {
  const PolynomialBasis a(4, 3), b(4, 3);
  EXPECT_EQ(a.indices(), b.indices());
  for (std::size_t k = 1; k < a.size(); ++k) {
    ASSERT_LE(a[k - 1].degree(), a[k].degree());
    if (a[k - 1].degree() == a[k].degree()) {
      EXPECT_GT(a[k - 1].exponents(), a[k].exponents());
    }
  }
}

TEST(EvalMonomial, HandCalculus) {
  const std::vector<double> x1{3.0, 5.0};
  auto e = eval_monomial(MultiIndex({2, 0}), x1);
  EXPECT_DOUBLE_EQ(e.value, 9.0);
  EXPECT_DOUBLE_EQ(e.gradient[0], 6.0);
  EXPECT_DOUBLE_EQ(e.gradient[1], 0.0);
  EXPECT_DOUBLE_EQ(e.laplacian, 2.0);

  const std::vector<double> x2{2.0, -1.0};
  e = eval_monomial(MultiIndex({1, 1}), x2);
  EXPECT_DOUBLE_EQ(e.value, -2.0);
  EXPECT_DOUBLE_EQ(e.gradient[0], -1.0);
  EXPECT_DOUBLE_EQ(e.gradient[1], 2.0);
  EXPECT_DOUBLE_EQ(e.laplacian, 0.0);
}

TEST(EvalMonomial, ZeroCoordinate) {
  const std::vector<double> x{0.0};
  const auto e = eval_monomial(MultiIndex({2}), x);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.gradient[0], 0.0);
  EXPECT_EQ(e.laplacian, 2.0);

  const std::vector<double> y{0.0, 0.0};
  const auto f = eval_monomial(MultiIndex({1, 0}), y);
  EXPECT_TRUE(std::isfinite(f.laplacian));
  EXPECT_EQ(f.gradient[0], 1.0);
}

TEST(EvalMonomial, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int d = 1; d <= 3; ++d) {
    const PolynomialBasis basis(d, 4);
    for (int trial = 0; trial < 20; ++trial) {
      Vector x(d);
      for (auto& v : x) v = coord(rng);
      for (const auto& alpha : basis.indices()) {
        const auto f = [&](const Vector& p) { return oracle::monomial_value(alpha, p); };
        const auto e = eval_monomial(alpha, {x.data(), static_cast<std::size_t>(d)});
        EXPECT_NEAR(e.value, f(x), 1e-12 * (1.0 + std::abs(f(x))));
        const Vector g = oracle::fd_gradient(f, x, 1e-5);
        for (int i = 0; i < d; ++i) EXPECT_NEAR(e.gradient[i], g[i], 1e-6 * std::max(1.0, std::abs(g[i])));
        // second differences at h = 1e-5 are rounding-dominated; the five-point stencil is exact here
        const double lap = oracle::fd_laplacian(f, x, 1e-3);
        EXPECT_NEAR(e.laplacian, lap, 1e-6 * std::max(1.0, std::abs(lap)));
      }
    }
  }
}

}  // namespace
}  // namespace psd
