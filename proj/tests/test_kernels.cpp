#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minres/errors.hpp"
#include "minres/kernels.hpp"

using namespace minres;

TEST(ClosedForms, DirichletAndFejer) {
  const auto d = kernels::dirichlet(2, 3);
  EXPECT_EQ(d.values().size(), 10u);
  for (double v : d.values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(d.provenance(), Provenance::Dirichlet);
  const auto f = kernels::fejer(3);
  EXPECT_EQ(f.values(), std::vector<double>({1.0, 0.75, 0.5, 0.25}));
}

TEST(ClosedForms, UnivariateMinresMatchesEigenOracle) {
  for (int r = 0; r <= 25; ++r) {
    const auto k = kernels::kpm_jackson(r);
    const auto o = kernels::univariate_minres_oracle(r);
    const double expect = 1.0 - std::cos(std::numbers::pi / (r + 2.0));
    EXPECT_NEAR(o.sigma2, expect, 1e-12) << "r=" << r;
    EXPECT_NEAR(o.g[0], 1.0, 1e-12);
    if (r >= 1) {
      EXPECT_NEAR(kernels::resolution(k), expect, 1e-12);
    }
    for (int j = 0; j <= r; ++j) EXPECT_NEAR(k.values()[static_cast<std::size_t>(j)], o.g[static_cast<std::size_t>(j)], 1e-10);
  }
}

TEST(ClosedForms, NormalisationEnforced) {
  auto idx = kernels::shared_index(1, 2);
  EXPECT_THROW(KernelCoefficients(IndexedValues{idx, {0.9, 0.5, 0.1}}, Provenance::Sdp), InconsistentSolution);
  EXPECT_THROW(KernelCoefficients(IndexedValues{idx, {1.0, 0.5}}, Provenance::Sdp), ParameterError);
}

TEST(ProductKernel, CoefficientsAndResolution) {
  const auto u = kernels::kpm_jackson(2);
  const auto p = kernels::product_kernel(std::vector<KernelCoefficients>{u, u});
  EXPECT_EQ(p.n(), 2);
  EXPECT_EQ(p.r(), 4);
  EXPECT_NEAR(p.at(std::vector<int>{1, 1}), u.values()[1] * u.values()[1], 1e-15);
  EXPECT_NEAR(p.at(std::vector<int>{2, 2}), u.values()[2] * u.values()[2], 1e-15);
  EXPECT_EQ(p.at(std::vector<int>{3, 0}), 0.0);
  EXPECT_NEAR(kernels::resolution(p), kernels::product_kpm_resolution(2, 2), 1e-14);
  EXPECT_TRUE(p.is_permutation_invariant());
  EXPECT_THROW(kernels::product_kernel(std::vector<KernelCoefficients>{u, kernels::kpm_jackson(3)}), ParameterError);
}

TEST(EvalKernel, DirichletAtCorner) {
  const auto d = kernels::dirichlet(1, 1);
  const std::vector<double> one{1.0};
  EXPECT_DOUBLE_EQ(kernels::eval_kernel(d, one, one), 3.0);
  const auto d2 = kernels::dirichlet(2, 1);
  const std::vector<double> c{1.0, 1.0};
  EXPECT_DOUBLE_EQ(kernels::eval_kernel(d2, c, c), 5.0);
  EXPECT_THROW(kernels::eval_kernel(d2, one, c), ParameterError);
}

TEST(EvalKernel, UnivariateMinresIsNonNegative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int r : {1, 4, 9, 16}) {
    const auto k = kernels::kpm_jackson(r);
    for (int t = 0; t < 2000; ++t) {
      const std::vector<double> x{u(rng)};
      const std::vector<double> y{u(rng)};
      EXPECT_GE(kernels::eval_kernel(k, x, y), -1e-12);
    }
  }
}

TEST(ApplyKernel, DirichletReproducesPolynomials) {
  const auto c = cheb::cheb_coeffs([](std::span<const double> x) { return x[0] * x[1] + 2.0 * x[0] * x[0] - 0.5; }, 2, 3, 8);
  const auto a = kernels::apply_kernel(kernels::dirichlet(2, 3), c);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> x{u(rng), u(rng)};
    const double want = x[0] * x[1] + 2.0 * x[0] * x[0] - 0.5;
    EXPECT_NEAR(kernels::eval_approx(a, x), want, 1e-13);
    EXPECT_NEAR(kernels::eval_approx_direct(a, x), want, 1e-13);
  }
  EXPECT_NEAR(kernels::uniform_error([](std::span<const double> x) { return x[0] * x[1] + 2.0 * x[0] * x[0] - 0.5; },
                                     a, 21),
              0.0, 1e-13);
}

TEST(ApplyKernel, DampsLinearTerm) {
  // f(x) = x has c_1 = 1/2, so b_1 = 2 g_1 c_1 = g_1.
  const auto c = cheb::cheb_coeffs([](std::span<const double> x) { return x[0]; }, 1, 4, 16);
  const auto k = kernels::fejer(4);
  const auto a = kernels::apply_kernel(k, c);
  EXPECT_NEAR(a.b.values[1], 0.8, 1e-14);
  EXPECT_NEAR(a.b.values[0], 0.0, 1e-14);
  const std::vector<double> x{0.5};
  EXPECT_NEAR(kernels::eval_approx(a, x), 0.4, 1e-14);
  EXPECT_THROW(kernels::apply_kernel(kernels::fejer(3), c), ParameterError);
}

TEST(ApplyKernel, ClenshawAgreesWithDirectSum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto c = cheb::cheb_coeffs([](std::span<const double> x) { return std::exp(x[0] - x[1] * x[2]); }, 3, 6, 12);
  const auto a = kernels::apply_kernel(kernels::dirichlet(3, 6), c);
  const kernels::ApproxEvaluator ev(a);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    EXPECT_NEAR(kernels::eval_approx(a, x), kernels::eval_approx_direct(a, x), 1e-12);
    EXPECT_NEAR(ev(x), kernels::eval_approx_direct(a, x), 1e-12);
  }
}

TEST(Bounds, ConvergenceAndErrorBounds) {
  EXPECT_NEAR(kernels::conv_rate_bound(2, 2), 2.0, 1e-15);
  EXPECT_NEAR(kernels::conv_rate_bound(1, 1), 1.0 - std::cos(std::numbers::pi / 2.0), 1e-15);
  EXPECT_THROW(kernels::conv_rate_bound(3, 2), ParameterError);
  EXPECT_NEAR(kernels::prop1_bound([](double d) { return d; }, 0.5), 1.0 + std::numbers::pi / std::numbers::sqrt2, 1e-14);
}

TEST(Grid, VisitsEveryNodeIncludingCorners) {
  int count = 0;
  double lo = 1.0;
  double hi = -1.0;
  kernels::for_each_grid_point(2, 5, [&](std::span<const double> x) {
    ++count;
    lo = std::min({lo, x[0], x[1]});
    hi = std::max({hi, x[0], x[1]});
  });
  EXPECT_EQ(count, 25);
  EXPECT_EQ(lo, -1.0);
  EXPECT_EQ(hi, 1.0);
}
