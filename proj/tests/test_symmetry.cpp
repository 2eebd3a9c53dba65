#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "minres/errors.hpp"
#include "minres/pipeline.hpp"
#include "minres/symmetry.hpp"

using namespace minres;

TEST(Partitions, ReverseLexOrderAndCharacters) {
  EXPECT_EQ(partitions(4), std::vector<Partition>({{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}}));
  // Dimensions chi(1^n) and the sign character.
  EXPECT_EQ(character({3, 1}, {1, 1, 1, 1}), 3);
  EXPECT_EQ(character({2, 2}, {1, 1, 1, 1}), 2);
  EXPECT_EQ(character({1, 1, 1}, {2, 1}), -1);
  EXPECT_EQ(character({2, 1}, {3}), -1);
  EXPECT_EQ(character({3, 1, 1}, {5}), 1);
  // Column orthogonality for S_4: sum_lambda chi(mu)^2 = |centralizer(mu)|.
  long long sum = 0;
  for (const auto& l : partitions(4)) sum += character(l, {2, 1, 1}) * character(l, {2, 1, 1});
  EXPECT_EQ(sum, 4);
}

TEST(Reynolds, AveragesOverPermutations) {
  const auto set = build_index_set(2, 1);  // (0,0), (1,0), (0,1)
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(1, 0) = 1.0;
  const Eigen::MatrixXd avg = reynolds_average(m, set);
  EXPECT_DOUBLE_EQ(avg(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(avg(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(avg.sum(), 1.0);
  m.setZero();
  m(1, 2) = 2.0;
  const Eigen::MatrixXd avg2 = reynolds_average(m, set);
  EXPECT_DOUBLE_EQ(avg2(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(avg2(2, 1), 1.0);

  const auto big = build_index_set(3, 2);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  const auto s = static_cast<Eigen::Index>(big.size());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(s, s);
  EXPECT_LT((reynolds_average(id, big) - id).norm(), 1e-15);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(s, s, [&] { return nd(rng); });
    const Eigen::MatrixXd once = reynolds_average(r, big);
    EXPECT_LT((reynolds_average(once, big) - once).norm(), 1e-12);
    const sdp::SparseMatrix sparse = r.sparseView();
    EXPECT_LT((Eigen::MatrixXd(reynolds_average(sparse, big)) - once).norm(), 1e-12);
  }
}

TEST(Blocks, KnownBlockSizes) {
  EXPECT_EQ(compute_blocks(2, 2).dims, std::vector<int>({4, 2}));
  EXPECT_EQ(compute_blocks(3, 3).dims, std::vector<int>({7, 6, 1}));
  EXPECT_EQ(compute_blocks(4, 4).dims, std::vector<int>({12, 13, 5, 3}));
  EXPECT_EQ(compute_blocks(1, 5).dims, std::vector<int>({6}));
}

TEST(Blocks, OrthonormalBasisAndDimensionCount) {
  for (const auto& [n, r] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {4, 3}}) {
    const auto sb = compute_blocks(n, r);
    const auto s = static_cast<Eigen::Index>(sb.s());
    EXPECT_LT((sb.basis.transpose() * sb.basis - Eigen::MatrixXd::Identity(s, s)).norm(), 1e-10);
    long long total = 0;
    for (std::size_t b = 0; b < sb.dims.size(); ++b) {
      total += static_cast<long long>(sb.dims[b]) * sb.multiplicities[b];
      EXPECT_EQ(sb.multiplicities[b], character(sb.irreps[b], Partition(static_cast<std::size_t>(n), 1)));
    }
    EXPECT_EQ(total, s);
  }
}

TEST(Blocks, InvariantMatricesAreBlockDiagonal) {
  const auto sb = compute_blocks(3, 4);
  const auto s = static_cast<Eigen::Index>(sb.s());
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(s, s, [&] { return nd(rng); });
    const Eigen::MatrixXd inv = reynolds_average(Eigen::MatrixXd(g + g.transpose()), *sb.gram);
    EXPECT_LT(detail::block_defect(sb, inv) / inv.norm(), 1e-8) << "trial " << trial;
    double leak = 0.0;
    const sdp::SparseMatrix sp = inv.sparseView();
    EXPECT_NO_THROW(conjugate_invariant(sb, sp, &leak));
    EXPECT_LT(leak, 1e-8);
  }
  // A matrix that is not invariant is rejected.
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(s, s);
  e(1, 1) = 1.0;
  const sdp::SparseMatrix se = e.sparseView();
  EXPECT_THROW(conjugate_invariant(sb, se), BasisQualityError);
}

TEST(Blocks, SeedIndependentStructure) {
  const auto a = compute_blocks(3, 3, 1);
  const auto b = compute_blocks(3, 3, 123456);
  EXPECT_EQ(a.dims, b.dims);
  EXPECT_EQ(a.multiplicities, b.multiplicities);
}

TEST(ReducedSdp, KnownOptima) {
  EXPECT_NEAR(solve_reduced_kernel(2, 2).sigma2, 1.0, 1e-6);
  EXPECT_NEAR(solve_reduced_kernel(3, 3).sigma2, 1.5, 1e-6);
  EXPECT_NEAR(solve_reduced_kernel(4, 2).sigma2, 2.9310, 1e-3);
  EXPECT_NEAR(solve_reduced_kernel(3, 6).sigma2, 0.7764, 1e-3);
}

TEST(ReducedSdp, AgreesWithFullModel) {
  for (const auto& [n, r] : std::vector<std::pair<int, int>>{{2, 3}, {2, 5}, {3, 2}, {3, 4}}) {
    const auto full = solve_full_kernel(n, r);
    const auto red = solve_reduced_kernel(n, r);
    EXPECT_NEAR(full.sigma2, red.sigma2, 1e-7);
    for (std::size_t p = 0; p < full.kernel.values().size(); ++p)
      EXPECT_NEAR(full.kernel.values()[p], red.kernel.values()[p], 1e-6);
    const auto& dims = red.reduced->block_dims;
    EXPECT_LT(*std::max_element(dims.begin(), dims.end()), full.full->block_dims[0]);
  }
}

TEST(ReducedSdp, BothModeChecksAgreement) {
  KernelSolveOptions opt;
  opt.symmetry = SymmetryMode::Both;
  const auto k = solve_kernel(2, 4, opt);
  ASSERT_TRUE(k.full.has_value());
  ASSERT_TRUE(k.reduced.has_value());
  EXPECT_NEAR(k.full->objective, k.reduced->objective, 1e-6);
  EXPECT_NEAR(k.sigma2, 0.548709, 1e-6);
}

TEST(ReducedSdp, MemoryGuard) {
  EXPECT_THROW(build_reduced_sdp(5, 10, std::nullopt, kDefaultBlockSeed, 1000), ProblemTooLarge);
}
