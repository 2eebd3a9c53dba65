#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "minres/errors.hpp"
#include "minres/pipeline.hpp"
#include "minres/sdp_model.hpp"
#include "minres/sdp_solver.hpp"

using namespace minres;

TEST(ConstraintMatrix, UnivariateEntries) {
  const auto gram = build_index_set(1, 2);
  const Eigen::MatrixXd c1 = build_constraint_matrix(SignedIndex{{1}}, Subset{}, gram);
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(c1, want);
  const Eigen::MatrixXd c2 = build_constraint_matrix(SignedIndex{{2}}, Subset{}, gram);
  want << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  EXPECT_EQ(c2, want);
}

TEST(ConstraintMatrix, SignPatternSelectsDiagonalDirection) {
  const auto gram = build_index_set(2, 1);  // (0,0), (1,0), (0,1)
  const Eigen::MatrixXd plus = build_constraint_matrix(SignedIndex{{1, 1}}, Subset{}, gram);
  EXPECT_EQ(plus.sum(), 0.0);  // (1,1) is not a difference of degree-1 indices
  const Eigen::MatrixXd minus = build_constraint_matrix(SignedIndex{{1, 1}}, Subset::of({2}), gram);
  EXPECT_EQ(minus(1, 2), 1.0);
  EXPECT_EQ(minus(2, 1), 1.0);
  EXPECT_EQ(minus.sum(), 2.0);
  EXPECT_TRUE(minus.isApprox(minus.transpose()));
}

// For any Gram matrix M, sum_{a,b} M_ab cos((a-b).theta) equals
// Tr M + sum over sign classes {+-d} of <M, C^(gamma,I)> cos(d.theta).
TEST(ConstraintMatrix, TrigonometricIdentity) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.2, 3.2);
  std::normal_distribution<double> nd;
  const std::vector<std::pair<int, int>> shapes{{1, 4}, {2, 2}, {2, 3}, {3, 2}};
  for (int trial = 0; trial < 100; ++trial) {
    const auto [n, r] = shapes[static_cast<std::size_t>(trial) % shapes.size()];
    const auto gram = build_index_set(n, r);
    const auto s = static_cast<Eigen::Index>(gram.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(s, s, [&] { return nd(rng); });
    const Eigen::MatrixXd m = g * g.transpose();
    std::vector<double> theta(static_cast<std::size_t>(n));
    for (double& t : theta) t = u(rng);
    auto dot = [&](const std::vector<int>& d) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += d[static_cast<std::size_t>(i)] * theta[static_cast<std::size_t>(i)];
      return acc;
    };
    double direct = 0.0;
    for (std::size_t a = 0; a < gram.size(); ++a)
      for (std::size_t b = 0; b < gram.size(); ++b)
        direct += m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * std::cos(dot(difference(gram[a], gram[b]).entries));
    double expanded = m.trace();
    std::set<std::vector<int>> seen{std::vector<int>(static_cast<std::size_t>(n), 0)};
    for (const auto& gamma : build_index_set(n, 2 * r))
      for (const Subset I : build_subset_family(n).subsets) {
        const auto d = omega(I, SignedIndex{gamma.entries()});
        if (!seen.insert(sign_class_key(d)).second) continue;
        const Eigen::MatrixXd c = build_constraint_matrix(d, Subset{}, gram);
        expanded += m.cwiseProduct(c).sum() * std::cos(dot(d.entries));
      }
    EXPECT_NEAR(direct, expanded, 1e-9 * (1.0 + std::abs(direct))) << "trial " << trial;
  }
}

TEST(IndependentSubset, DropsDependentMatrices) {
  const auto gram = build_index_set(1, 2);
  const SparseMatrix a = build_constraint_matrix(SignedIndex{{1}}, Subset{}, gram);
  const SparseMatrix b = build_constraint_matrix(SignedIndex{{2}}, Subset{}, gram);
  SparseMatrix sum = a + b;
  const auto kept = independent_subset({a, b, sum, a});
  EXPECT_EQ(kept, std::vector<std::size_t>({0, 1}));
}

TEST(FullSdp, SmallOptima) {
  const auto k11 = solve_full_kernel(1, 1);
  EXPECT_NEAR(k11.sigma2, 0.5, 1e-7);
  EXPECT_NEAR(k11.full->objective, 0.5, 1e-7);
  const auto k21 = solve_full_kernel(2, 1);
  EXPECT_NEAR(k21.sigma2, 1.5, 1e-7);
  EXPECT_NEAR(k21.kernel.at(std::vector<int>{1, 0}), 0.25, 1e-7);
  for (int r = 1; r <= 8; ++r)
    EXPECT_NEAR(solve_full_kernel(1, r).sigma2, 1.0 - std::cos(std::numbers::pi / (r + 2.0)), 1e-7) << "r=" << r;
}

TEST(FullSdp, DecoupledGramDegree) {
  KernelSolveOptions opt;
  opt.r_gram = 4;
  const auto k = solve_full_kernel(2, 3, opt);
  EXPECT_NEAR(k.sigma2, 0.691, 1e-3);
  EXPECT_EQ(k.kernel.provenance(), Provenance::SdpDecoupled);
  EXPECT_LT(k.sigma2, solve_full_kernel(2, 3).sigma2);
}

TEST(FullSdp, ParameterChecks) {
  EXPECT_THROW(build_full_sdp(0, 2), ParameterError);
  EXPECT_THROW(build_full_sdp(2, 0), ParameterError);
  EXPECT_THROW(build_full_sdp(2, 3, 2), ParameterError);
  EXPECT_THROW(build_full_sdp(5, 10, std::nullopt, 1000), ProblemTooLarge);
}

TEST(Extraction, ConsistentReadingsAndNormalisation) {
  const FullSdp model = build_full_sdp(2, 3);
  const auto sol = sdp::solve(model.problem);
  const auto k = extract_coefficients(model, sol);
  EXPECT_DOUBLE_EQ(k.values()[0], 1.0);
  EXPECT_TRUE(k.is_permutation_invariant(1e-6));
  // The objective equals the resolution of the extracted kernel.
  EXPECT_NEAR(kernels::resolution(k), sol.objective_value, 1e-7);

  auto scaled = sol;
  scaled.X[0] *= 1.01;
  EXPECT_THROW(extract_coefficients(model, scaled), InconsistentSolution);

  // Breaking the Gram matrix along one I makes the readings disagree.
  auto skewed = sol;
  const auto& gram = *model.gram;
  const auto p = static_cast<Eigen::Index>(gram.position(std::vector<int>{1, 0}));
  const auto q = static_cast<Eigen::Index>(gram.position(std::vector<int>{0, 1}));
  skewed.X[0](p, q) += 1e-3;
  skewed.X[0](q, p) += 1e-3;
  EXPECT_THROW(extract_coefficients(model, skewed), InconsistentSolution);
}
