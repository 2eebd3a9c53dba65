#pragma once

// S_n acts on N^n_r by permuting coordinates and on Gram matrices by
// simultaneous row/column permutation. Invariant Gram matrices decompose into
// one block per irreducible representation, repeated once per dimension of the
// irreducible representation. The symmetry-adapted basis is found numerically
// from two random invariant matrices and the blocks are labelled by their
// S_n characters.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "minres/errors.hpp"
#include "minres/indexcomb.hpp"
#include "minres/kernels.hpp"
#include "minres/sdp_model.hpp"
#include "minres/sdp_problem.hpp"

namespace minres {

inline constexpr std::uint64_t kDefaultBlockSeed = 20240607;
inline constexpr double kBlockTolerance = 1e-8;
inline constexpr std::size_t kReducedMemoryBudget = std::size_t{2} << 30;  // bytes for dense reduced constraints

// ---------------------------------------------------------------------------
// Partitions and S_n characters
// ---------------------------------------------------------------------------

using Partition = std::vector<int>;

/// Partitions of n, parts non-increasing, in reverse lexicographic order:
/// (n), (n-1,1), (n-2,2), (n-2,1,1), ...
inline std::vector<Partition> partitions(int n) {
  std::vector<Partition> out;
  Partition cur;
  std::function<void(int, int)> rec = [&](int remaining, int max_part) {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      cur.push_back(p);
      rec(remaining - p, p);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

/// chi^lambda(mu) by the Murnaghan-Nakayama rule on beta-sets.
inline long long character(const Partition& lambda, const Partition& mu) {
  const auto len = lambda.size();
  std::vector<int> beta(len);
  for (std::size_t i = 0; i < len; ++i) beta[i] = lambda[i] + static_cast<int>(len - 1 - i);
  std::function<long long(std::vector<int>&, std::size_t)> rec = [&](std::vector<int>& b, std::size_t part) -> long long {
    if (part == mu.size()) return 1;
    const int k = mu[part];
    long long total = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const int from = b[i];
      const int to = from - k;
      if (to < 0 || std::find(b.begin(), b.end(), to) != b.end()) continue;
      int between = 0;
      for (int v : b)
        if (v > to && v < from) ++between;
      b[i] = to;
      total += (between % 2 ? -1 : 1) * rec(b, part + 1);
      b[i] = from;
    }
    return total;
  };
  return rec(beta, 0);
}

/// A permutation of {0..n-1} with the given cycle type (consecutive cycles).
inline std::vector<int> cycle_type_representative(const Partition& mu) {
  std::vector<int> perm;
  int start = 0;
  for (int len : mu) {
    for (int j = 0; j < len; ++j) perm.push_back(start + (j + 1) % len);
    start += len;
  }
  return perm;
}

// ---------------------------------------------------------------------------
// Reynolds operator
// ---------------------------------------------------------------------------

namespace detail {

/// (alpha, beta) -> canonical representative of its S_n orbit, encoded as
/// pos(alpha') * s + pos(beta') where the column pairs are sorted.
inline std::int64_t pair_orbit_key(const IndexSet& set, std::size_t p, std::size_t q,
                                   std::vector<std::pair<int, int>>& scratch, std::vector<int>& a,
                                   std::vector<int>& b) {
  const auto& x = set[p];
  const auto& y = set[q];
  const std::size_t n = x.size();
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = {x[i], y[i]};
  std::sort(scratch.begin(), scratch.end());
  a.resize(n);
  b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = scratch[i].first;
    b[i] = scratch[i].second;
  }
  return static_cast<std::int64_t>(set.position(a)) * static_cast<std::int64_t>(set.size()) +
         static_cast<std::int64_t>(set.position(b));
}

}  // namespace detail

/// Orbit id of every Gram entry (row-major), plus orbit sizes.
struct PairOrbits {
  std::size_t s = 0;
  std::vector<std::int32_t> id;
  std::vector<std::int32_t> size;

  explicit PairOrbits(const IndexSet& set) : s(set.size()), id(s * s) {
    std::unordered_map<std::int64_t, std::int32_t> ids;
    std::vector<std::pair<int, int>> scratch;
    std::vector<int> a;
    std::vector<int> b;
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q) {
        const auto key = detail::pair_orbit_key(set, p, q, scratch, a, b);
        auto [it, inserted] = ids.try_emplace(key, static_cast<std::int32_t>(size.size()));
        if (inserted) size.push_back(0);
        id[p * s + q] = it->second;
        ++size[static_cast<std::size_t>(it->second)];
      }
  }

  [[nodiscard]] Eigen::MatrixXd average(const Eigen::MatrixXd& m) const {
    std::vector<double> sum(size.size(), 0.0);
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q)
        sum[static_cast<std::size_t>(id[p * s + q])] += m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q) {
        const auto o = static_cast<std::size_t>(id[p * s + q]);
        out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = sum[o] / size[o];
      }
    return out;
  }
};

/// (1/n!) sum_sigma P_sigma A P_sigma^T for dense A over `set`.
inline Eigen::MatrixXd reynolds_average(const Eigen::MatrixXd& m, const IndexSet& set) {
  if (m.rows() != static_cast<Eigen::Index>(set.size()) || m.cols() != m.rows())
    throw ParameterError("reynolds_average: matrix does not match the index set");
  return PairOrbits(set).average(m);
}

/// Sparse variant: each nonzero is spread evenly over its entry-pair orbit.
inline sdp::SparseMatrix reynolds_average(const sdp::SparseMatrix& m, const IndexSet& set) {
  const auto s = static_cast<Eigen::Index>(set.size());
  if (m.rows() != s || m.cols() != s) throw ParameterError("reynolds_average: matrix does not match the index set");
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> acc;
  std::vector<std::pair<int, int>> cols;
  std::vector<int> a;
  std::vector<int> b;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c)
    for (sdp::SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const auto& x = set[static_cast<std::size_t>(it.row())];
      const auto& y = set[static_cast<std::size_t>(it.col())];
      cols.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) cols[i] = {x[i], y[i]};
      std::vector<std::pair<Eigen::Index, Eigen::Index>> members;
      for_each_distinct_permutation(cols, [&](const std::vector<std::pair<int, int>>& perm) {
        a.resize(perm.size());
        b.resize(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
          a[i] = perm[i].first;
          b[i] = perm[i].second;
        }
        members.emplace_back(static_cast<Eigen::Index>(set.position(a)), static_cast<Eigen::Index>(set.position(b)));
      });
      const double share = it.value() / static_cast<double>(members.size());
      for (const auto& e : members) acc[e] += share;
    }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(acc.size());
  for (const auto& [e, v] : acc)
    if (v != 0.0) trips.emplace_back(e.first, e.second, v);
  sdp::SparseMatrix out(s, s);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------
// Block structure
// ---------------------------------------------------------------------------

struct SymmetryBlocks {
  int n = 0;
  int r = 0;  // Gram degree
  std::shared_ptr<const IndexSet> gram;
  std::vector<int> dims;            // k_1..k_k: block orders
  std::vector<int> multiplicities;  // identical copies of each block
  std::vector<Partition> irreps;    // S_n irreducible representation per block
  Eigen::MatrixXd basis;            // s x s orthogonal; columns: block, copy, position
  std::vector<Eigen::Index> offsets;
  std::uint64_t seed = 0;

  [[nodiscard]] int k() const { return static_cast<int>(dims.size()); }
  [[nodiscard]] std::size_t s() const { return gram->size(); }

  /// s x dims[b] columns spanning copy `c` of block `b`.
  [[nodiscard]] auto copy(std::size_t b, int c) const {
    return basis.middleCols(offsets[b] + static_cast<Eigen::Index>(c) * dims[b], dims[b]);
  }
};

namespace detail {

inline Eigen::MatrixXd random_symmetric(Eigen::Index s, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd g(s, s);
  for (Eigen::Index j = 0; j < s; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) g(i, j) = g(j, i) = nd(rng);
  return g;
}

/// Off-block Frobenius mass of Q^T A Q plus the spread between copies of
/// each block; zero for a correct symmetry-adapted basis.
inline double block_defect(const SymmetryBlocks& sb, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd t = sb.basis.transpose() * a * sb.basis;
  double spread = 0.0;
  for (std::size_t b = 0; b < sb.dims.size(); ++b) {
    const Eigen::Index m = sb.dims[b];
    const Eigen::MatrixXd first = t.block(sb.offsets[b], sb.offsets[b], m, m);
    for (int c = 0; c < sb.multiplicities[b]; ++c) {
      const Eigen::Index o = sb.offsets[b] + c * m;
      spread += (t.block(o, o, m, m) - first).squaredNorm();
      t.block(o, o, m, m).setZero();
    }
  }
  return std::sqrt(t.squaredNorm() + spread);
}

inline std::optional<SymmetryBlocks> try_compute_blocks(int n, const std::shared_ptr<const IndexSet>& gram,
                                                        const PairOrbits& orbits, std::uint64_t seed) {
  const auto s = static_cast<Eigen::Index>(gram->size());
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd a = orbits.average(random_symmetric(s, rng));
  const Eigen::MatrixXd b = orbits.average(random_symmetric(s, rng));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd& ev = es.eigenvalues();
  Eigen::MatrixXd v = es.eigenvectors();

  // Clusters of numerically equal eigenvalues.
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // [start, length)
  for (Eigen::Index i = 0; i < s;) {
    Eigen::Index j = i + 1;
    while (j < s && ev(j) - ev(j - 1) < 1e-9 * scale) ++j;
    clusters.emplace_back(i, j - i);
    i = j;
  }
  const std::size_t nc = clusters.size();

  // Coupling strength between clusters under the second sample.
  const Eigen::MatrixXd bp = v.transpose() * b * v;
  const double bscale = std::max(1.0, bp.cwiseAbs().maxCoeff());
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
  for (std::size_t x = 0; x < nc; ++x)
    for (std::size_t y = x + 1; y < nc; ++y) {
      const double w = bp.block(clusters[x].first, clusters[y].first, clusters[x].second, clusters[y].second).norm();
      if (w > kBlockTolerance * bscale)
        weight(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
            weight(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = w;
    }

  // Components via a maximum spanning forest (Prim), aligning each cluster
  // with its tree parent by the polar factor of their coupling block.
  std::vector<int> comp(nc, -1);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t root = 0; root < nc; ++root) {
    if (comp[root] >= 0) continue;
    const int cid = static_cast<int>(members.size());
    members.push_back({root});
    comp[root] = cid;
    std::vector<double> best(nc, 0.0);
    std::vector<std::size_t> parent(nc, root);
    for (std::size_t y = 0; y < nc; ++y)
      if (comp[y] < 0) best[y] = weight(static_cast<Eigen::Index>(root), static_cast<Eigen::Index>(y));
    for (;;) {
      std::size_t pick = nc;
      double bw = 0.0;
      for (std::size_t y = 0; y < nc; ++y)
        if (comp[y] < 0 && best[y] > bw) {
          bw = best[y];
          pick = y;
        }
      if (pick == nc) break;
      const auto [ps, pl] = clusters[parent[pick]];
      const auto [cs, cl] = clusters[pick];
      if (pl != cl) return std::nullopt;  // coincident eigenvalues across components
      const Eigen::MatrixXd w = v.middleCols(cs, cl).transpose() * b * v.middleCols(ps, pl);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::MatrixXd u = svd.matrixU() * svd.matrixV().transpose();
      v.middleCols(cs, cl) = (v.middleCols(cs, cl) * u).eval();
      comp[pick] = cid;
      members.back().push_back(pick);
      for (std::size_t y = 0; y < nc; ++y)
        if (comp[y] < 0) {
          const double wy = weight(static_cast<Eigen::Index>(pick), static_cast<Eigen::Index>(y));
          if (wy > best[y]) {
            best[y] = wy;
            parent[y] = pick;
          }
        }
    }
  }

  // Label each component by its character.
  const auto parts = partitions(n);
  std::vector<Partition> classes = parts;  // cycle types
  std::vector<std::vector<std::size_t>> perm_maps;
  for (const auto& mu : classes) {
    const auto sigma = cycle_type_representative(mu);
    std::vector<std::size_t> map(static_cast<std::size_t>(s));
    std::vector<int> img(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < s; ++p) {
      const auto& alpha = (*gram)[static_cast<std::size_t>(p)];
      for (int i = 0; i < n; ++i) img[static_cast<std::size_t>(i)] = alpha[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])];
      map[static_cast<std::size_t>(p)] = gram->position(img);
    }
    perm_maps.push_back(std::move(map));
  }

  struct Found {
    std::size_t partition;
    std::size_t component;
  };
  std::vector<Found> found;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const Eigen::Index d = clusters[members[c].front()].second;
    for (std::size_t x : members[c])
      if (clusters[x].second != d) return std::nullopt;
    const double m = static_cast<double>(members[c].size());
    std::vector<double> chi(classes.size(), 0.0);
    for (std::size_t t = 0; t < classes.size(); ++t) {
      double tr = 0.0;
      for (std::size_t x : members[c]) {
        const auto [st, len] = clusters[x];
        for (Eigen::Index col = st; col < st + len; ++col)
          for (Eigen::Index p = 0; p < s; ++p)
            tr += v(p, col) * v(static_cast<Eigen::Index>(perm_maps[t][static_cast<std::size_t>(p)]), col);
      }
      chi[t] = tr / m;
    }
    std::optional<std::size_t> label;
    for (std::size_t l = 0; l < parts.size() && !label; ++l) {
      bool ok = true;
      for (std::size_t t = 0; t < classes.size() && ok; ++t)
        ok = std::abs(chi[t] - static_cast<double>(character(parts[l], classes[t]))) < 1e-6;
      if (ok) label = l;
    }
    if (!label) return std::nullopt;
    for (const auto& f : found)
      if (f.partition == *label) return std::nullopt;  // one component per irrep
    found.push_back({*label, c});
  }
  std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) { return x.partition < y.partition; });

  SymmetryBlocks sb;
  sb.n = n;
  sb.r = gram->r();
  sb.gram = gram;
  sb.seed = seed;
  sb.basis.resize(s, s);
  Eigen::Index col = 0;
  for (const auto& f : found) {
    const auto& mem = members[f.component];
    const int m = static_cast<int>(mem.size());
    const int d = static_cast<int>(clusters[mem.front()].second);
    sb.dims.push_back(m);
    sb.multiplicities.push_back(d);
    sb.irreps.push_back(parts[f.partition]);
    sb.offsets.push_back(col);
    for (int copy = 0; copy < d; ++copy)
      for (int j = 0; j < m; ++j) sb.basis.col(col++) = v.col(clusters[mem[static_cast<std::size_t>(j)]].first + copy);
  }
  if (col != s) return std::nullopt;

  const double ortho = (sb.basis.transpose() * sb.basis - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff();
  if (ortho > 1e-10) return std::nullopt;
  if (block_defect(sb, a) > kBlockTolerance * std::max(1.0, a.norm())) return std::nullopt;
  if (block_defect(sb, b) > kBlockTolerance * std::max(1.0, b.norm())) return std::nullopt;
  return sb;
}

}  // namespace detail

/// Symmetry-adapted block structure of invariant Gram matrices over N^n_{r_gram}.
/// Blocks are ordered by their irreducible representation, (n) first, in
/// reverse lexicographic order of partitions.
inline SymmetryBlocks compute_blocks(int n, int r_gram, std::uint64_t seed = kDefaultBlockSeed,
                                     std::size_t cap = kDefaultSizeCap) {
  if (n < 1) throw ParameterError("compute_blocks: n must be at least 1");
  if (r_gram < 0) throw ParameterError("compute_blocks: degree must be non-negative");
  auto gram = std::make_shared<const IndexSet>(build_index_set(n, r_gram, cap));
  const PairOrbits orbits(*gram);
  std::mt19937_64 reseed(seed);
  std::uint64_t attempt_seed = seed;
  for (int attempt = 0; attempt < 5; ++attempt) {
    if (auto sb = detail::try_compute_blocks(n, gram, orbits, attempt_seed)) return *sb;
    attempt_seed = reseed();
  }
  throw BasisQualityError("compute_blocks: could not resolve the invariant block structure for n = " +
                          std::to_string(n) + ", r = " + std::to_string(r_gram) + " after 5 attempts");
}

// ---------------------------------------------------------------------------
// Reduced SDP
// ---------------------------------------------------------------------------

struct ReducedSdp {
  int n = 0;
  int r = 0;
  int r_gram = 0;
  SymmetryBlocks blocks;
  std::shared_ptr<const IndexSet> kernel_index;
  OrbitTable orbits;  // of kernel_index
  SubsetFamily family;
  sdp::SdpProblem problem;
  std::vector<ConstraintLabel> labels;
  std::vector<sdp::BlockSymMatrix> readout;  // per orbit: reduced C^(rep, 0); entry 0 unused
  std::size_t dropped_dependent = 0;
  double max_leakage = 0.0;  // relative off-block mass seen while conjugating
};

/// Sum over copies of Q_{b,c}^T A Q_{b,c}, one dense part per block. Throws
/// BasisQualityError when A is not block diagonal in the basis.
inline sdp::BlockSymMatrix conjugate_invariant(const SymmetryBlocks& sb, const sdp::SparseMatrix& a,
                                               double* leakage_out = nullptr) {
  const Eigen::MatrixXd aq = a * sb.basis;
  sdp::BlockSymMatrix out;
  double defect2 = 0.0;
  const double norm = std::sqrt(a.squaredNorm());
  for (std::size_t b = 0; b < sb.dims.size(); ++b) {
    const Eigen::Index m = sb.dims[b];
    const int d = sb.multiplicities[b];
    std::vector<Eigen::MatrixXd> copies;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
    for (int c = 0; c < d; ++c) {
      const auto q = sb.copy(b, c);
      const auto aqc = aq.middleCols(sb.offsets[b] + c * m, m);
      Eigen::MatrixXd blk = q.transpose() * aqc;
      defect2 += (aqc - q * blk).squaredNorm();
      sum += blk;
      copies.push_back(std::move(blk));
    }
    const Eigen::MatrixXd mean = sum / d;
    for (const auto& c : copies) defect2 += (c - mean).squaredNorm();
    Eigen::MatrixXd part = 0.5 * (sum + sum.transpose());
    if (part.norm() > 1e-12 * std::max(1.0, norm)) out.parts.push_back(sdp::BlockPart::make_dense(b, std::move(part)));
  }
  const double leakage = std::sqrt(defect2) / std::max(1.0, norm);
  if (leakage_out) *leakage_out = std::max(*leakage_out, leakage);
  if (leakage > kBlockTolerance)
    throw BasisQualityError("symmetry-adapted basis leaves off-block mass " + std::to_string(leakage));
  return out;
}

inline ReducedSdp build_reduced_sdp(int n, int r, std::optional<int> r_gram_opt = std::nullopt,
                                    std::uint64_t seed = kDefaultBlockSeed, std::size_t cap = kDefaultSizeCap) {
  const int r_gram = r_gram_opt.value_or(r);
  detail::check_degrees(n, r, r_gram);
  ReducedSdp out;
  out.n = n;
  out.r = r;
  out.r_gram = r_gram;
  out.blocks = compute_blocks(n, r_gram, seed, cap);
  out.kernel_index = std::make_shared<const IndexSet>(build_index_set(n, r, cap));
  out.orbits = build_orbits(*out.kernel_index);
  out.family = build_subset_family(n);
  const auto& gram = *out.blocks.gram;
  const auto s = static_cast<Eigen::Index>(gram.size());

  auto averaged = [&](const SignedIndex& g, Subset I) {
    return reynolds_average(build_constraint_matrix(g, I, gram), gram);
  };

  std::vector<detail::Candidate> cands;
  std::set<std::vector<int>> seen_single;
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen_pair;

  out.readout.resize(out.orbits.size());
  for (std::size_t o = 1; o < out.orbits.size(); ++o) {
    const SignedIndex g{out.orbits.orbits[o].representative.entries()};
    const auto base_key = orbit_class_key(g);
    const sdp::SparseMatrix base = averaged(g, Subset{});
    out.readout[o] = conjugate_invariant(out.blocks, base, &out.max_leakage);
    for (const Subset I : out.family.subsets) {
      if (I.empty()) continue;
      const auto k2 = orbit_class_key(omega(I, g));
      if (k2 == base_key) continue;
      if (!seen_pair.insert({base_key, k2}).second) continue;
      sdp::SparseMatrix d = base - averaged(g, I);
      d.prune(1e-14);
      if (d.nonZeros() == 0) continue;
      cands.push_back({{ConstraintLabel::Kind::Equate, g, I}, std::move(d)});
    }
  }
  for (const auto& g : build_gamma_set(n, r, r_gram)) {
    if (!std::is_sorted(g.entries.begin(), g.entries.end())) continue;
    for (const Subset I : out.family.subsets) {
      if (!seen_single.insert(orbit_class_key(omega(I, g))).second) continue;
      sdp::SparseMatrix c = averaged(g, I);
      if (c.nonZeros() == 0) continue;
      cands.push_back({{ConstraintLabel::Kind::Vanish, g, I}, std::move(c)});
    }
  }
  {
    sdp::SparseMatrix id(s, s);
    id.setIdentity();
    cands.push_back({{ConstraintLabel::Kind::Trace, SignedIndex{std::vector<int>(static_cast<std::size_t>(n), 0)}, {}},
                     std::move(id)});
  }

  std::vector<sdp::SparseMatrix> mats;
  mats.reserve(cands.size());
  for (const auto& c : cands) mats.push_back(c.matrix);
  const auto kept = independent_subset(mats);
  out.dropped_dependent = cands.size() - kept.size();

  double bytes_per_constraint = 0.0;
  for (int d : out.blocks.dims) bytes_per_constraint += 8.0 * d * d;
  if (bytes_per_constraint * static_cast<double>(kept.size()) > static_cast<double>(kReducedMemoryBudget))
    throw ProblemTooLarge("reduced SDP for n = " + std::to_string(n) + ", r = " + std::to_string(r) + ", r' = " +
                          std::to_string(r_gram) + " needs about " +
                          std::to_string(static_cast<long long>(bytes_per_constraint * kept.size() / (1 << 20))) +
                          " MiB of dense constraint blocks");
  out.problem.block_dims = out.blocks.dims;
  out.problem.block_weights.assign(out.blocks.multiplicities.begin(), out.blocks.multiplicities.end());
  for (std::size_t k : kept) {
    out.problem.constraints.push_back(conjugate_invariant(out.blocks, cands[k].matrix, &out.max_leakage));
    out.problem.rhs.push_back(cands[k].label.kind == ConstraintLabel::Kind::Trace ? 1.0 : 0.0);
    out.labels.push_back(std::move(cands[k].label));
  }

  const SignedIndex en{MultiIndex::unit(n, n - 1).entries()};
  sdp::SparseMatrix obj = averaged(en, Subset{});
  obj *= -0.5 * n;
  out.problem.objective = conjugate_invariant(out.blocks, obj, &out.max_leakage);
  out.problem.offset = static_cast<double>(n);
  return out;
}

/// Full Gram matrix sum_b sum_c Q_{b,c} X_b Q_{b,c}^T from reduced blocks.
inline Eigen::MatrixXd reconstruct_gram(const SymmetryBlocks& sb, const sdp::BlockMatrix& x) {
  const auto s = static_cast<Eigen::Index>(sb.s());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s, s);
  for (std::size_t b = 0; b < sb.dims.size(); ++b)
    for (int c = 0; c < sb.multiplicities[b]; ++c) {
      const auto q = sb.copy(b, c);
      m.noalias() += q * x[b] * q.transpose();
    }
  return 0.5 * (m + m.transpose());
}

/// Kernel coefficients from a solved reduced model: one value per orbit,
/// expanded by orbit membership, cross-checked across the subset family on
/// the reconstructed Gram matrix and rescaled to g_0 = 1.
inline KernelCoefficients extract_coefficients_reduced(const ReducedSdp& model, const sdp::SdpSolution& sol,
                                                       double tol = kExtractionTolerance) {
  if (sol.X.size() != model.blocks.dims.size()) throw ParameterError("extract_coefficients_reduced: block mismatch");
  double g0 = 0.0;
  for (std::size_t b = 0; b < sol.X.size(); ++b) g0 += model.blocks.multiplicities[b] * sol.X[b].trace();
  if (std::abs(g0 - 1.0) > tol)
    throw InconsistentSolution("extracted g_0 = " + std::to_string(g0) + " differs from 1");

  const auto& gram = *model.blocks.gram;
  const Eigen::MatrixXd full = reconstruct_gram(model.blocks, sol.X);
  std::vector<double> per_orbit(model.orbits.size(), 0.0);
  per_orbit[0] = g0;
  for (std::size_t o = 1; o < model.orbits.size(); ++o) {
    const double g = 0.5 * model.readout[o].dot(sol.X);
    const SignedIndex rep{model.orbits.orbits[o].representative.entries()};
    for (const Subset I : model.family.subsets) {
      const double gi = 0.5 * sdp::BlockPart::make_sparse(0, build_constraint_matrix(rep, I, gram)).dot(full);
      if (std::abs(gi - g) > tol)
        throw InconsistentSolution("coefficient readings for the same orbit disagree by " +
                                   std::to_string(std::abs(gi - g)));
    }
    per_orbit[o] = g;
  }
  std::vector<double> g(model.kernel_index->size());
  for (std::size_t p = 0; p < g.size(); ++p) g[p] = per_orbit[model.orbits.orbit_of[p]] / g0;
  const auto prov = model.r_gram > model.r ? Provenance::SdpDecoupled : Provenance::Sdp;
  return {IndexedValues{model.kernel_index, std::move(g)}, prov};
}

}  // namespace minres
