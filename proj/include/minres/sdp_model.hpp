#pragma once

// The full (non-reduced) kernel SDP over a single Gram block indexed by
// N^n_{r_gram}:
//
//   min  sum_i (1 - 1/2 <M, C^(e_i,0)>)
//   s.t. <M, C^(a,0) - C^(a,I)> = 0   a in N^n_r \ {0}, I in family \ {0}
//        <M, C^(g,I)> = 0             g in Gamma(n, r, r_gram), I in family
//        Tr M = 1,  M psd.
//
// C^(g,I) has a one at (a,b) iff a - b = +-omega_I(g).

#include <Eigen/Sparse>

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/indexcomb.hpp"
#include "minres/kernels.hpp"
#include "minres/sdp_problem.hpp"

namespace minres {

using sdp::SparseMatrix;

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kExtractionTolerance = 1e-7;

/// C^(gamma,I) as a sparse symmetric 0/1 matrix over `gram`.
inline SparseMatrix build_constraint_matrix(const SignedIndex& gamma, Subset I, const IndexSet& gram) {
  if (gamma.size() != static_cast<std::size_t>(gram.n()))
    throw ParameterError("build_constraint_matrix: gamma has the wrong dimension");
  const auto w = omega(I, gamma).entries;
  const auto s = static_cast<Eigen::Index>(gram.size());
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<int> beta(w.size());
  for (std::size_t p = 0; p < gram.size(); ++p) {
    const auto& a = gram[p];
    for (int sign : {1, -1}) {
      bool ok = true;
      for (std::size_t i = 0; i < w.size(); ++i) {
        beta[i] = a[i] - sign * w[i];
        if (beta[i] < 0) ok = false;
      }
      if (!ok) continue;
      if (auto q = gram.find(beta)) trips.emplace_back(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(*q), 1.0);
    }
  }
  SparseMatrix m(s, s);
  m.setFromTriplets(trips.begin(), trips.end(), [](double a, double) { return a; });
  m.makeCompressed();
  return m;
}

inline bool same_entries(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  SparseMatrix d = a - b;
  d.prune(0.0);
  return d.nonZeros() == 0;
}

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Indices (ascending) of a maximal linearly independent subfamily, greedily
/// keeping earlier matrices. Matrices with disjoint supports are independent,
/// so the test runs per connected component of the support-overlap graph.
inline std::vector<std::size_t> independent_subset(const std::vector<SparseMatrix>& mats,
                                                   double tol = kRankTolerance) {
  const std::size_t m = mats.size();
  detail::UnionFind uf(m);
  std::unordered_map<std::int64_t, std::size_t> owner;
  for (std::size_t k = 0; k < m; ++k) {
    const auto& a = mats[k];
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
        if (it.value() == 0.0) continue;
        const std::int64_t key = static_cast<std::int64_t>(it.row()) * a.cols() + it.col();
        auto [pos, inserted] = owner.try_emplace(key, k);
        if (!inserted) uf.unite(pos->second, k);
      }
  }
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t k = 0; k < m; ++k) components[uf.find(k)].push_back(k);

  std::vector<std::size_t> kept;
  for (const auto& [root, members] : components) {
    // Incremental Cholesky of the Gram matrix of the kept members.
    std::vector<std::size_t> chosen;
    Eigen::MatrixXd l(0, 0);
    for (std::size_t k : members) {
      const double gkk = mats[k].squaredNorm();
      if (gkk <= 0.0) continue;
      const auto c = static_cast<Eigen::Index>(chosen.size());
      Eigen::VectorXd v(c);
      for (Eigen::Index i = 0; i < c; ++i) v(i) = mats[chosen[static_cast<std::size_t>(i)]].cwiseProduct(mats[k]).sum();
      Eigen::VectorXd w = c ? Eigen::VectorXd(l.triangularView<Eigen::Lower>().solve(v)) : Eigen::VectorXd();
      const double d = gkk - w.squaredNorm();
      if (d <= tol * gkk) continue;
      Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(c + 1, c + 1);
      grown.topLeftCorner(c, c) = l;
      grown.block(c, 0, 1, c) = w.transpose();
      grown(c, c) = std::sqrt(d);
      l = std::move(grown);
      chosen.push_back(k);
    }
    kept.insert(kept.end(), chosen.begin(), chosen.end());
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

struct ConstraintLabel {
  enum class Kind { Equate, Vanish, Trace };
  Kind kind = Kind::Trace;
  SignedIndex gamma;
  Subset subset;
};

struct FullSdp {
  int n = 0;
  int r = 0;
  int r_gram = 0;
  std::shared_ptr<const IndexSet> gram;          // N^n_{r_gram}
  std::shared_ptr<const IndexSet> kernel_index;  // N^n_r
  SubsetFamily family;
  sdp::SdpProblem problem;
  std::vector<ConstraintLabel> labels;  // parallel to problem.constraints
  std::size_t dropped_dependent = 0;
};

namespace detail {

inline void check_degrees(int n, int r, int r_gram) {
  if (n < 1) throw ParameterError("dimension n must be at least 1");
  if (r < 1) throw ParameterError("degree r must be at least 1");
  if (r_gram < r) throw ParameterError("Gram degree r' must satisfy r' >= r");
}

/// Candidate constraints shared by the full and the reduced model, before
/// rank filtering. `key` maps a class representative to a dedup key.
struct Candidate {
  ConstraintLabel label;
  SparseMatrix matrix;
};

}  // namespace detail

inline FullSdp build_full_sdp(int n, int r, std::optional<int> r_gram_opt = std::nullopt,
                              std::size_t cap = kDefaultSizeCap) {
  const int r_gram = r_gram_opt.value_or(r);
  detail::check_degrees(n, r, r_gram);
  FullSdp out;
  out.n = n;
  out.r = r;
  out.r_gram = r_gram;
  out.gram = std::make_shared<const IndexSet>(build_index_set(n, r_gram, cap));
  out.kernel_index = std::make_shared<const IndexSet>(build_index_set(n, r, cap));
  out.family = build_subset_family(n);
  const auto& gram = *out.gram;
  const auto s = static_cast<Eigen::Index>(gram.size());

  std::vector<detail::Candidate> cands;
  std::set<std::vector<int>> seen_single;
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen_pair;

  // (a) g_alpha equals the coefficient read through every I.
  for (std::size_t p = 1; p < out.kernel_index->size(); ++p) {
    const SignedIndex a{(*out.kernel_index)[p].entries()};
    const auto base_key = sign_class_key(a);
    SparseMatrix base;
    bool have_base = false;
    for (const Subset I : out.family.subsets) {
      if (I.empty()) continue;
      const auto k2 = sign_class_key(omega(I, a));
      if (k2 == base_key) continue;
      if (!seen_pair.insert({base_key, k2}).second) continue;
      if (!have_base) {
        base = build_constraint_matrix(a, Subset{}, gram);
        have_base = true;
      }
      SparseMatrix d = base - build_constraint_matrix(a, I, gram);
      d.prune(0.0);
      if (d.nonZeros() == 0) continue;
      cands.push_back({{ConstraintLabel::Kind::Equate, a, I}, std::move(d)});
    }
  }
  // (b) no trigonometric terms beyond degree r.
  for (const auto& g : build_gamma_set(n, r, r_gram)) {
    for (const Subset I : out.family.subsets) {
      if (!seen_single.insert(sign_class_key(omega(I, g))).second) continue;
      SparseMatrix c = build_constraint_matrix(g, I, gram);
      if (c.nonZeros() == 0) continue;
      cands.push_back({{ConstraintLabel::Kind::Vanish, g, I}, std::move(c)});
    }
  }
  // (c) trace normalization.
  {
    SparseMatrix id(s, s);
    id.setIdentity();
    cands.push_back({{ConstraintLabel::Kind::Trace, SignedIndex{std::vector<int>(static_cast<std::size_t>(n), 0)}, {}},
                     std::move(id)});
  }

  std::vector<SparseMatrix> mats;
  mats.reserve(cands.size());
  for (const auto& c : cands) mats.push_back(c.matrix);
  const auto kept = independent_subset(mats);
  out.dropped_dependent = cands.size() - kept.size();

  out.problem.block_dims = {static_cast<int>(s)};
  for (std::size_t k : kept) {
    out.problem.constraints.push_back({{sdp::BlockPart::make_sparse(0, std::move(cands[k].matrix))}});
    out.problem.rhs.push_back(cands[k].label.kind == ConstraintLabel::Kind::Trace ? 1.0 : 0.0);
    out.labels.push_back(std::move(cands[k].label));
  }

  SparseMatrix obj(s, s);
  for (int i = 0; i < n; ++i) {
    const auto e = MultiIndex::unit(n, i);
    obj += build_constraint_matrix(SignedIndex{e.entries()}, Subset{}, gram);
  }
  obj *= -0.5;
  out.problem.objective.parts.push_back(sdp::BlockPart::make_sparse(0, std::move(obj)));
  out.problem.offset = static_cast<double>(n);
  return out;
}

/// Kernel coefficients from a solved full model: g_a = 1/2 <X, C^(a,0)>,
/// g_0 = Tr X, cross-checked across the subset family, then rescaled so that
/// g_0 = 1 exactly (X / Tr X stays feasible for the homogeneous constraints).
inline KernelCoefficients extract_coefficients(const FullSdp& model, const sdp::SdpSolution& sol,
                                               double tol = kExtractionTolerance) {
  if (sol.X.size() != 1) throw ParameterError("extract_coefficients: expected a single Gram block");
  const auto& x = sol.X[0];
  const auto& gram = *model.gram;
  const auto& idx = *model.kernel_index;
  const double g0 = x.trace();
  if (std::abs(g0 - 1.0) > tol)
    throw InconsistentSolution("extracted g_0 = Tr X = " + std::to_string(g0) + " differs from 1");
  std::vector<double> g(idx.size());
  g[0] = g0;
  for (std::size_t p = 1; p < idx.size(); ++p) {
    const SignedIndex a{idx[p].entries()};
    const double ga = 0.5 * sdp::BlockPart::make_sparse(0, build_constraint_matrix(a, Subset{}, gram)).dot(x);
    for (const Subset I : model.family.subsets) {
      if (I.empty()) continue;
      const double gi = 0.5 * sdp::BlockPart::make_sparse(0, build_constraint_matrix(a, I, gram)).dot(x);
      if (std::abs(gi - ga) > tol)
        throw InconsistentSolution("coefficient readings for the same index disagree by " +
                                   std::to_string(std::abs(gi - ga)));
    }
    g[p] = ga;
  }
  for (double& v : g) v /= g0;
  const auto prov = model.r_gram > model.r ? Provenance::SdpDecoupled : Provenance::Sdp;
  return {IndexedValues{model.kernel_index, std::move(g)}, prov};
}

}  // namespace minres
