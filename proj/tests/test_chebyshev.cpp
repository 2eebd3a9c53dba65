#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"

using namespace minres;

TEST(ChebEval, SmallDegrees) {
  EXPECT_DOUBLE_EQ(cheb::eval(0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(cheb::eval(1, 0.3), 0.3);
  EXPECT_NEAR(cheb::eval(2, 0.5), -0.5, 1e-15);
  EXPECT_THROW(cheb::eval(2, 1.0 + 1e-9), DomainError);
  EXPECT_NO_THROW(cheb::eval(2, 1.0 + 1e-13));
}

TEST(ChebEval, MatchesCosineForm) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double x = u(rng);
    const auto all = cheb::eval_all(30, x);
    for (int k = 0; k <= 30; ++k) {
      EXPECT_NEAR(cheb::eval(k, x), std::cos(k * std::acos(x)), 1e-12);
      EXPECT_NEAR(all[static_cast<std::size_t>(k)], cheb::eval(k, x), 1e-12);
    }
  }
}

TEST(ChebEval, Multivariate) {
  const std::vector<double> x{0.5, 0.5};
  EXPECT_DOUBLE_EQ(cheb::eval_multi(MultiIndex{0, 0}, x), 1.0);
  EXPECT_NEAR(cheb::eval_multi(MultiIndex{1, 1}, x), 0.25, 1e-15);
  EXPECT_NEAR(cheb::eval_multi(MultiIndex{2, 1}, std::vector<double>{0.5, 1.0}), -0.5, 1e-15);
  EXPECT_THROW(cheb::eval_multi(MultiIndex{1}, x), ParameterError);
}

TEST(InnerProduct, NormConstants) {
  EXPECT_DOUBLE_EQ(cheb::inner_product(MultiIndex{1, 0}, MultiIndex{1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(cheb::inner_product(MultiIndex{0, 0}, MultiIndex{0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cheb::inner_product(MultiIndex{1, 0}, MultiIndex{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cheb::norm_constant(MultiIndex{3, 1, 2}), 0.125);
}

TEST(Quadrature, ExactForProductsOfChebyshevPolynomials) {
  for (int n = 1; n <= 3; ++n)
    for (int r : {2, 5, 8}) {
      if (n == 3 && r == 8) continue;  // keeps the test quick
      const auto set = build_index_set(n, r);
      const auto q = cheb::gauss_rule(n, r + 1);
      for (std::size_t a = 0; a < set.size(); a += 3)
        for (std::size_t b = 0; b < set.size(); b += 2) {
          const double v = cheb::integrate(
              [&](std::span<const double> x) { return cheb::eval_multi(set[a], x) * cheb::eval_multi(set[b], x); }, q);
          EXPECT_NEAR(v, cheb::inner_product(set[a], set[b]), 1e-10);
        }
    }
}

TEST(ChebCoeffs, Examples) {
  const auto one = cheb::cheb_coeffs([](std::span<const double>) { return 1.0; }, 2, 2, 8);
  EXPECT_NEAR(one.values[0], 1.0, 1e-14);
  for (std::size_t p = 1; p < one.size(); ++p) EXPECT_NEAR(one.values[p], 0.0, 1e-14);

  const auto t11 = cheb::cheb_coeffs([](std::span<const double> x) { return x[0] * x[1]; }, 2, 2, 8);
  EXPECT_NEAR(t11.at(std::vector<int>{1, 1}), 0.25, 1e-14);
  EXPECT_NEAR(t11.at(std::vector<int>{1, 0}), 0.0, 1e-14);
  EXPECT_NEAR(t11.at(std::vector<int>{0, 2}), 0.0, 1e-14);

  const auto sq = cheb::cheb_coeffs([](std::span<const double> x) { return x[0] * x[0]; }, 2, 2, 8);
  EXPECT_NEAR(sq.at(std::vector<int>{0, 0}), 0.5, 1e-14);
  EXPECT_NEAR(sq.at(std::vector<int>{2, 0}), 0.25, 1e-14);
  EXPECT_NEAR(sq.at(std::vector<int>{0, 2}), 0.0, 1e-14);

  EXPECT_THROW(cheb::cheb_coeffs([](std::span<const double>) { return 1.0; }, 2, 4, 4), ParameterError);
}

TEST(ChebCoeffs, AgreesWithDirectQuadrature) {
  auto f = [](std::span<const double> x) { return std::exp(x[0]) * std::sin(2.0 * x[1]) + x[2]; };
  const auto set = std::make_shared<const IndexSet>(build_index_set(3, 4));
  const auto c = cheb::cheb_coeffs(f, set, 9);
  const auto q = cheb::gauss_rule(3, 9);
  for (std::size_t p = 0; p < set->size(); ++p) {
    const double direct = cheb::integrate([&](std::span<const double> x) { return f(x) * cheb::eval_multi((*set)[p], x); }, q);
    EXPECT_NEAR(c.values[p], direct, 1e-13);
  }
}
