#pragma once

// Multi-index sets on N^n_r, sign-flip maps, subset families, permutation
// orbits and the residual difference set used to pin unwanted Gram terms.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "minres/errors.hpp"

namespace minres {

/// Default refusal threshold for s(n, r).
inline constexpr std::size_t kDefaultSizeCap = 5000;

/// C(n + r, r), throwing ProblemTooLarge on 64-bit overflow.
inline std::uint64_t binomial_size(int n, int r) {
  if (n < 0 || r < 0) throw ParameterError("binomial_size: negative argument");
  // C(n+r, r) = prod_{i=1..r} (n+i)/i, exact at every step.
  std::uint64_t acc = 1;
  for (int i = 1; i <= r; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max() / num)
      throw ProblemTooLarge("binomial_size: s(n,r) overflows 64 bits");
    acc = acc * num / static_cast<std::uint64_t>(i);
  }
  return acc;
}

/// Exponent vector alpha in N^n.
class MultiIndex {
 public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int e : entries_)
      if (e < 0) throw ParameterError("MultiIndex: negative entry");
    degree_ = std::accumulate(entries_.begin(), entries_.end(), 0);
  }

  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int operator[](std::size_t i) const { return entries_[i]; }
  [[nodiscard]] const std::vector<int>& entries() const { return entries_; }

  /// Number of non-zero entries.
  [[nodiscard]] int hamming() const {
    return static_cast<int>(std::count_if(entries_.begin(), entries_.end(), [](int e) { return e != 0; }));
  }

  [[nodiscard]] bool is_sorted() const { return std::is_sorted(entries_.begin(), entries_.end()); }

  [[nodiscard]] MultiIndex sorted() const {
    auto e = entries_;
    std::sort(e.begin(), e.end());
    return MultiIndex(std::move(e));
  }

  /// Unit vector e_i (0-based i).
  static MultiIndex unit(int n, int i) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i)] = 1;
    return MultiIndex(std::move(e));
  }

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<int> entries_;
  int degree_ = 0;
};

/// Canonical order: total degree ascending, then entries lexicographically
/// descending, i.e. (2,0) < (1,1) < (0,2).
inline bool graded_lex_less(std::span<const int> a, std::span<const int> b) {
  const int da = std::accumulate(a.begin(), a.end(), 0);
  const int db = std::accumulate(b.begin(), b.end(), 0);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  return graded_lex_less(std::span<const int>(a.entries()), std::span<const int>(b.entries()));
}

/// gamma in Z^n, typically a difference alpha - beta.
struct SignedIndex {
  std::vector<int> entries;

  [[nodiscard]] std::size_t size() const { return entries.size(); }
  [[nodiscard]] int l1() const {
    int s = 0;
    for (int e : entries) s += e < 0 ? -e : e;
    return s;
  }
  [[nodiscard]] SignedIndex negated() const {
    SignedIndex out{entries};
    for (int& e : out.entries) e = -e;
    return out;
  }
  friend bool operator==(const SignedIndex&, const SignedIndex&) = default;
};

inline SignedIndex difference(const MultiIndex& a, const MultiIndex& b) {
  SignedIndex g{std::vector<int>(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) g.entries[i] = a[i] - b[i];
  return g;
}

/// Subset of [n] stored as a bit mask; bit i stands for coordinate i+1.
struct Subset {
  std::uint32_t mask = 0;

  [[nodiscard]] bool contains(int i) const { return (mask >> i) & 1U; }
  [[nodiscard]] bool empty() const { return mask == 0; }
  [[nodiscard]] Subset complement(int n) const {
    const std::uint32_t full = n >= 32 ? ~0U : ((1U << n) - 1U);
    return Subset{~mask & full};
  }
  [[nodiscard]] std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < 32; ++i)
      if (contains(i)) out.push_back(i + 1);
    return out;
  }
  static Subset of(std::initializer_list<int> one_based) {
    Subset s;
    for (int i : one_based) s.mask |= 1U << (i - 1);
    return s;
  }
  static Subset full(int n) { return Subset{}.complement(n); }
  friend bool operator==(const Subset&, const Subset&) = default;
};

/// Flip the sign of gamma_i for every i in I.
inline SignedIndex omega(Subset I, const SignedIndex& gamma) {
  SignedIndex out = gamma;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    if (I.contains(static_cast<int>(i))) out.entries[i] = -out.entries[i];
  return out;
}

/// One subset out of every complementary pair {I, I^c}: all I with 1 not in I.
struct SubsetFamily {
  int n = 0;
  std::vector<Subset> subsets;
};

inline SubsetFamily build_subset_family(int n) {
  if (n < 1 || n > 30) throw ParameterError("build_subset_family: need 1 <= n <= 30");
  SubsetFamily fam{n, {}};
  const std::uint32_t count = 1U << (n - 1);
  fam.subsets.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) fam.subsets.push_back(Subset{k << 1});
  return fam;
}

struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int e : v) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(e));
      h *= 1099511628211ULL;
    }
    return h;
  }
};

/// N^n_r in canonical (graded-lex) order with O(1) position lookup.
class IndexSet {
 public:
  IndexSet() = default;

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int r() const { return r_; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] const MultiIndex& operator[](std::size_t i) const { return items_[i]; }
  [[nodiscard]] const std::vector<MultiIndex>& items() const { return items_; }
  [[nodiscard]] auto begin() const { return items_.begin(); }
  [[nodiscard]] auto end() const { return items_.end(); }

  [[nodiscard]] std::optional<std::size_t> find(const std::vector<int>& entries) const {
    auto it = position_.find(entries);
    if (it == position_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] std::size_t position(const std::vector<int>& entries) const {
    auto p = find(entries);
    if (!p) throw ParameterError("IndexSet: multi-index not in N^n_r");
    return *p;
  }

  [[nodiscard]] std::size_t position(const MultiIndex& a) const { return position(a.entries()); }

  friend IndexSet build_index_set(int n, int r, std::size_t cap);

 private:
  int n_ = 0;
  int r_ = 0;
  std::vector<MultiIndex> items_;
  std::unordered_map<std::vector<int>, std::size_t, VectorHash> position_;
};

namespace detail {

// Compositions of `remaining` into the slots [pos, n), first entry largest.
inline void emit_compositions(std::vector<int>& cur, std::size_t pos, int remaining,
                              std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    emit_compositions(cur, pos + 1, remaining - v, out);
  }
}

}  // namespace detail

/// All alpha in N^n with |alpha| <= r, graded-lex ordered.
inline IndexSet build_index_set(int n, int r, std::size_t cap = kDefaultSizeCap) {
  if (n < 1) throw ParameterError("build_index_set: n must be positive");
  if (r < 0) throw ParameterError("build_index_set: r must be non-negative");
  const std::uint64_t s = binomial_size(n, r);
  if (s > cap)
    throw ProblemTooLarge("build_index_set: s(" + std::to_string(n) + "," + std::to_string(r) +
                          ") = " + std::to_string(s) + " exceeds cap " + std::to_string(cap));
  IndexSet set;
  set.n_ = n;
  set.r_ = r;
  set.items_.reserve(static_cast<std::size_t>(s));
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  for (int d = 0; d <= r; ++d) detail::emit_compositions(cur, 0, d, set.items_);
  set.position_.reserve(set.items_.size());
  for (std::size_t i = 0; i < set.items_.size(); ++i) set.position_.emplace(set.items_[i].entries(), i);
  return set;
}

/// Visit every distinct permutation of `values` (multiset permutations).
template <class T, class Fn>
void for_each_distinct_permutation(std::vector<T> values, Fn&& fn) {
  std::sort(values.begin(), values.end());
  do {
    fn(static_cast<const std::vector<T>&>(values));
  } while (std::next_permutation(values.begin(), values.end()));
}

/// n! / prod(multiplicity!) for the entries of `alpha`.
inline std::uint64_t orbit_size(std::span<const int> alpha) {
  std::vector<int> v(alpha.begin(), alpha.end());
  std::sort(v.begin(), v.end());
  std::uint64_t num = 1;
  for (std::size_t i = 2; i <= v.size(); ++i) num *= i;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= v.size(); ++i) {
    if (i < v.size() && v[i] == v[i - 1]) {
      ++run;
    } else {
      for (std::size_t k = 2; k <= run; ++k) num /= k;
      run = 1;
    }
  }
  return num;
}

struct Orbit {
  MultiIndex representative;  // entries ascending
  std::vector<std::size_t> members;  // positions in the index set, ascending
};

/// Partition of N^n_r into S_n-orbits; representatives in graded-lex order.
struct OrbitTable {
  std::vector<Orbit> orbits;
  std::vector<std::size_t> orbit_of;  // position -> orbit number

  [[nodiscard]] std::size_t size() const { return orbits.size(); }
};

inline OrbitTable build_orbits(const IndexSet& set) {
  OrbitTable table;
  table.orbit_of.assign(set.size(), std::numeric_limits<std::size_t>::max());
  std::unordered_map<std::vector<int>, std::size_t, VectorHash> rep_to_orbit;
  for (std::size_t p = 0; p < set.size(); ++p) {
    auto key = set[p].sorted().entries();
    auto [it, inserted] = rep_to_orbit.try_emplace(key, table.orbits.size());
    if (inserted) table.orbits.push_back(Orbit{MultiIndex(key), {}});
    table.orbits[it->second].members.push_back(p);
    table.orbit_of[p] = it->second;
  }
  // Orbits were discovered in index order; re-sort by representative.
  std::vector<std::size_t> order(table.orbits.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return graded_lex_less(table.orbits[a].representative, table.orbits[b].representative);
  });
  std::vector<std::size_t> renumber(order.size());
  std::vector<Orbit> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    renumber[order[k]] = k;
    sorted.push_back(std::move(table.orbits[order[k]]));
  }
  table.orbits = std::move(sorted);
  for (auto& o : table.orbit_of) o = renumber[o];
  return table;
}

inline OrbitTable build_orbits(int n, int r) { return build_orbits(build_index_set(n, r)); }

/// Residual differences: canonical representatives (|gamma_1|, ..., |gamma_n|)
/// of all gamma = alpha - beta with alpha, beta in N^n_{r_gram} and
/// sum |gamma_i| > r, graded-lex ordered. Each representative stands for the
/// classes { +-omega_I(gamma) }.
inline std::vector<SignedIndex> build_gamma_set(int n, int r, int r_gram) {
  if (n < 1) throw ParameterError("build_gamma_set: n must be positive");
  if (r < 0 || r_gram < r) throw ParameterError("build_gamma_set: need 0 <= r <= r_gram");
  // |gamma| occurs iff its support splits into a positive and a negative part
  // of l1-mass at most r_gram each (take alpha = gamma^+, beta = gamma^-).
  std::vector<std::vector<int>> reps;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int sum) {
    if (pos == cur.size()) {
      if (sum <= r) return;
      for (std::uint32_t split = 0; split < (1U << n); ++split) {
        int pos_mass = 0;
        int neg_mass = 0;
        for (int i = 0; i < n; ++i) ((split >> i) & 1U ? neg_mass : pos_mass) += cur[static_cast<std::size_t>(i)];
        if (pos_mass <= r_gram && neg_mass <= r_gram) {
          reps.push_back(cur);
          return;
        }
      }
      return;
    }
    for (int v = 0; v <= r_gram && sum + v <= 2 * r_gram; ++v) {
      cur[pos] = v;
      rec(pos + 1, sum + v);
    }
    cur[pos] = 0;
  };
  rec(0, 0);
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    return graded_lex_less(std::span<const int>(a), std::span<const int>(b));
  });
  std::vector<SignedIndex> out;
  out.reserve(reps.size());
  for (auto& v : reps) out.push_back(SignedIndex{std::move(v)});
  return out;
}

/// Key identifying the class {gamma, -gamma}.
inline std::vector<int> sign_class_key(const SignedIndex& g) {
  auto neg = g.negated().entries;
  return std::min(g.entries, neg);
}

/// Key identifying { +-sigma(gamma) : sigma in S_n }.
inline std::vector<int> orbit_class_key(const SignedIndex& g) {
  auto a = g.entries;
  auto b = g.negated().entries;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::min(a, b);
}

}  // namespace minres
