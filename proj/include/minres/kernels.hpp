#pragma once

// Kernel coefficient containers, closed-form univariate kernels, product
// kernels, resolution, kernel evaluation and the damped Chebyshev expansion.
//
// Convention: K(x,y) = 1 + sum_{alpha != 0} 2^H(alpha) g_alpha T_alpha(x) T_alpha(y).
// The 2^H factor is applied at evaluation time and never stored in g.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/indexcomb.hpp"

namespace minres {

enum class Provenance { ClosedFormKpm, Fejer, Dirichlet, Product, Sdp, SdpDecoupled };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedFormKpm: return "closed-form-kpm";
    case Provenance::Fejer: return "fejer";
    case Provenance::Dirichlet: return "dirichlet";
    case Provenance::Product: return "product";
    case Provenance::Sdp: return "sdp";
    case Provenance::SdpDecoupled: return "sdp-decoupled";
  }
  return "unknown";
}

inline Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::ClosedFormKpm, Provenance::Fejer, Provenance::Dirichlet, Provenance::Product,
                 Provenance::Sdp, Provenance::SdpDecoupled})
    if (to_string(p) == s) return p;
  throw ParameterError("unknown kernel provenance '" + s + "'");
}

inline constexpr double kNormalizationTol = 1e-9;

/// g_alpha over N^n_r; g_0 = 1.
class KernelCoefficients {
 public:
  KernelCoefficients(IndexedValues g, Provenance provenance) : g_(std::move(g)), provenance_(provenance) {
    if (!g_.index || g_.values.size() != g_.index->size())
      throw ParameterError("KernelCoefficients: coefficient vector does not match its index set");
    if (std::abs(g_.values.at(0) - 1.0) > kNormalizationTol)
      throw InconsistentSolution("KernelCoefficients: g_0 = " + std::to_string(g_.values[0]) + " is not 1");
  }

  [[nodiscard]] int n() const { return g_.n(); }
  [[nodiscard]] int r() const { return g_.r(); }
  [[nodiscard]] Provenance provenance() const { return provenance_; }
  [[nodiscard]] const IndexedValues& g() const { return g_; }
  [[nodiscard]] const IndexSet& index() const { return *g_.index; }
  [[nodiscard]] std::shared_ptr<const IndexSet> index_ptr() const { return g_.index; }
  [[nodiscard]] double at(const MultiIndex& a) const { return g_.at(a); }
  [[nodiscard]] double at(const std::vector<int>& a) const { return g_.at(a); }
  [[nodiscard]] const std::vector<double>& values() const { return g_.values; }

  /// g_alpha == g_sigma(alpha) for every permutation sigma, within tol.
  [[nodiscard]] bool is_permutation_invariant(double tol = 1e-9) const {
    const auto& set = index();
    for (std::size_t p = 0; p < set.size(); ++p) {
      const double ref = g_.values[p];
      bool ok = true;
      for_each_distinct_permutation(set[p].entries(), [&](const std::vector<int>& perm) {
        if (std::abs(g_.at(perm) - ref) > tol) ok = false;
      });
      if (!ok) return false;
    }
    return true;
  }

 private:
  IndexedValues g_;
  Provenance provenance_;
};

namespace kernels {

inline std::shared_ptr<const IndexSet> shared_index(int n, int r, std::size_t cap = kDefaultSizeCap) {
  return std::make_shared<const IndexSet>(build_index_set(n, r, cap));
}

/// All g_alpha = 1: the truncated Chebyshev expansion.
inline KernelCoefficients dirichlet(int n, int r) {
  auto idx = shared_index(n, r);
  return {IndexedValues{idx, std::vector<double>(idx->size(), 1.0)}, Provenance::Dirichlet};
}

/// g_k = 1 - k/(r+1).
inline KernelCoefficients fejer(int r) {
  auto idx = shared_index(1, r);
  std::vector<double> g(idx->size());
  for (int k = 0; k <= r; ++k) g[static_cast<std::size_t>(k)] = 1.0 - static_cast<double>(k) / (r + 1.0);
  return {IndexedValues{idx, std::move(g)}, Provenance::Fejer};
}

/// Closed-form univariate minimum-resolution coefficient g_k for degree r.
inline double kpm_coefficient(int k, int r) {
  if (k == 0) return 1.0;
  const double q = std::numbers::pi / (r + 2.0);
  return ((r - k + 2.0) * std::cos(q * k) + std::sin(q * k) / std::tan(q)) / (r + 2.0);
}

/// Univariate minimum-resolution kernel; sigma^2 = 1 - cos(pi/(r+2)).
inline KernelCoefficients kpm_jackson(int r) {
  if (r < 0) throw ParameterError("kpm_jackson: r must be non-negative");
  auto idx = shared_index(1, r);
  std::vector<double> g(idx->size());
  for (int k = 0; k <= r; ++k) g[static_cast<std::size_t>(k)] = kpm_coefficient(k, r);
  return {IndexedValues{idx, std::move(g)}, Provenance::ClosedFormKpm};
}

/// a_0..a_r with unit Euclidean norm.
struct UnivariateAmplitudes {
  std::vector<double> a;
};

struct MinresOracleResult {
  UnivariateAmplitudes amplitudes;
  double sigma2 = 0.0;
  std::vector<double> g;  // g_k = sum_nu a_nu a_{nu+k}
};

/// Minimum resolution over unit amplitude vectors, solved as the smallest
/// eigenpair of tridiag(-1/2, 1, -1/2) of order r+1.
inline MinresOracleResult univariate_minres_oracle(int r) {
  if (r < 0) throw ParameterError("univariate_minres_oracle: r must be non-negative");
  const Eigen::Index m = r + 1;
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max<Eigen::Index>(m - 1, 0), -0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalFailure("univariate_minres_oracle: eigen-iteration did not converge");
  Eigen::VectorXd v = es.eigenvectors().col(0);
  if (v.sum() < 0) v = -v;
  v /= v.norm();
  MinresOracleResult out;
  out.sigma2 = es.eigenvalues()(0);
  out.amplitudes.a.assign(v.data(), v.data() + m);
  out.g.assign(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index nu = 0; nu + k < m; ++nu) out.g[static_cast<std::size_t>(k)] += v(nu) * v(nu + k);
  return out;
}

/// n-variate kernel of degree n*r from n univariate kernels of degree r:
/// g_alpha = prod_i g_{alpha_i} on the box alpha_i <= r, zero elsewhere.
inline KernelCoefficients product_kernel(std::span<const KernelCoefficients> parts) {
  if (parts.empty()) throw ParameterError("product_kernel: no factors");
  const int r = parts[0].r();
  for (const auto& p : parts) {
    if (p.n() != 1) throw ParameterError("product_kernel: factors must be univariate");
    if (p.r() != r) throw ParameterError("product_kernel: factors have mixed degrees");
  }
  const int n = static_cast<int>(parts.size());
  auto idx = shared_index(n, n * r);
  std::vector<double> g(idx->size(), 0.0);
  for (std::size_t p = 0; p < idx->size(); ++p) {
    const auto& a = (*idx)[p];
    double v = 1.0;
    for (int i = 0; i < n && v != 0.0; ++i) {
      const int ai = a[static_cast<std::size_t>(i)];
      v = ai > r ? 0.0 : v * parts[static_cast<std::size_t>(i)].values()[static_cast<std::size_t>(ai)];
    }
    g[p] = v;
  }
  return {IndexedValues{idx, std::move(g)}, Provenance::Product};
}

inline KernelCoefficients product_kernel(const std::vector<KernelCoefficients>& parts) {
  return product_kernel(std::span<const KernelCoefficients>(parts));
}

/// sigma_r^2 = sum_i (1 - g_{e_i}).
inline double resolution(const KernelCoefficients& k) {
  double s = 0.0;
  for (int i = 0; i < k.n(); ++i) s += 1.0 - k.at(MultiIndex::unit(k.n(), i));
  return s;
}

namespace detail {

inline std::vector<std::vector<double>> cheb_tables(std::span<const double> x, int r) {
  std::vector<std::vector<double>> t;
  t.reserve(x.size());
  for (double xi : x) t.push_back(cheb::eval_all(r, xi));
  return t;
}

}  // namespace detail

/// K(x, y) = 1 + sum_{alpha != 0} 2^H(alpha) g_alpha T_alpha(x) T_alpha(y).
inline double eval_kernel(const KernelCoefficients& k, std::span<const double> x, std::span<const double> y) {
  if (x.size() != static_cast<std::size_t>(k.n()) || y.size() != static_cast<std::size_t>(k.n()))
    throw ParameterError("eval_kernel: dimension mismatch");
  const auto tx = detail::cheb_tables(x, k.r());
  const auto ty = detail::cheb_tables(y, k.r());
  const auto& set = k.index();
  double acc = 0.0;
  for (std::size_t p = 0; p < set.size(); ++p) {
    const double gp = k.values()[p];
    if (gp == 0.0) continue;
    double term = gp;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto ai = static_cast<std::size_t>(set[p][i]);
      term *= tx[i][ai] * ty[i][ai];
      if (ai != 0) term *= 2.0;
    }
    acc += term;
  }
  return acc;
}

/// Coefficients b_alpha of the damped expansion sum_alpha b_alpha T_alpha(x).
struct ChebApproximation {
  IndexedValues b;

  [[nodiscard]] int n() const { return b.n(); }
  [[nodiscard]] int r() const { return b.r(); }
};

/// b_alpha = 2^H(alpha) g_alpha c_alpha, with c_alpha = <f, T_alpha>_mu.
inline ChebApproximation apply_kernel(const KernelCoefficients& k, const IndexedValues& c) {
  if (c.n() != k.n() || c.r() != k.r() || c.size() != k.values().size())
    throw ParameterError("apply_kernel: coefficient support does not match the kernel");
  ChebApproximation a{IndexedValues{k.index_ptr(), std::vector<double>(c.size())}};
  const auto& set = k.index();
  for (std::size_t p = 0; p < set.size(); ++p)
    a.b.values[p] = std::ldexp(k.values()[p] * c.values[p], set[p].hamming());
  return a;
}

namespace detail {

// Clenshaw along `axis`; coefficient of T_k on this axis is the nested sum
// over the remaining axes with at most `budget - k` total degree.
inline double clenshaw_nested(const std::vector<double>& dense, std::size_t rr, std::span<const double> x,
                              std::size_t axis, std::size_t offset, int budget) {
  const std::size_t n = x.size();
  std::size_t stride = 1;
  for (std::size_t a = axis + 1; a < n; ++a) stride *= rr;
  auto coeff = [&](int k) {
    const std::size_t off = offset + static_cast<std::size_t>(k) * stride;
    if (axis + 1 == n) return dense[off];
    return clenshaw_nested(dense, rr, x, axis + 1, off, budget - k);
  };
  const double xv = x[axis];
  double b1 = 0.0;
  double b2 = 0.0;
  for (int k = budget; k >= 1; --k) {
    const double b0 = coeff(k) + 2.0 * xv * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeff(0) + xv * b1 - b2;
}

}  // namespace detail

/// sum_alpha b_alpha T_alpha(x) by nested per-axis Clenshaw recurrences.
inline double eval_approx(const ChebApproximation& a, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(a.n())) throw ParameterError("eval_approx: dimension mismatch");
  for (double xi : x) cheb::check_domain(xi);
  const auto rr = static_cast<std::size_t>(a.r()) + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < x.size(); ++i) total *= rr;
  // Dense (r+1)^n coefficient tensor, zero off the simplex.
  std::vector<double> dense(total, 0.0);
  const auto& set = *a.b.index;
  for (std::size_t p = 0; p < set.size(); ++p) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < x.size(); ++i) flat = flat * rr + static_cast<std::size_t>(set[p][i]);
    dense[flat] = a.b.values[p];
  }
  return detail::clenshaw_nested(dense, rr, x, 0, 0, a.r());
}

/// Same value by direct summation of b_alpha T_alpha(x).
inline double eval_approx_direct(const ChebApproximation& a, std::span<const double> x) {
  const auto t = detail::cheb_tables(x, a.r());
  const auto& set = *a.b.index;
  double acc = 0.0;
  for (std::size_t p = 0; p < set.size(); ++p) {
    double term = a.b.values[p];
    for (std::size_t i = 0; i < x.size(); ++i) term *= t[i][static_cast<std::size_t>(set[p][i])];
    acc += term;
  }
  return acc;
}

/// Evaluator that caches the dense tensor for repeated evaluation.
class ApproxEvaluator {
 public:
  explicit ApproxEvaluator(const ChebApproximation& a) : n_(a.n()), r_(a.r()), rr_(static_cast<std::size_t>(a.r()) + 1) {
    std::size_t total = 1;
    for (int i = 0; i < n_; ++i) total *= rr_;
    dense_.assign(total, 0.0);
    const auto& set = *a.b.index;
    for (std::size_t p = 0; p < set.size(); ++p) {
      std::size_t flat = 0;
      for (int i = 0; i < n_; ++i) flat = flat * rr_ + static_cast<std::size_t>(set[p][static_cast<std::size_t>(i)]);
      dense_[flat] = a.b.values[p];
    }
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_)) throw ParameterError("eval_approx: dimension mismatch");
    return detail::clenshaw_nested(dense_, rr_, x, 0, 0, r_);
  }

 private:
  int n_;
  int r_;
  std::size_t rr_;
  std::vector<double> dense_;
};

/// Uniform tensor grid on [-1,1]^n with endpoints; calls fn(point) per node.
template <class Fn>
void for_each_grid_point(int n, int per_axis, Fn&& fn) {
  if (per_axis < 2) throw ParameterError("grid needs at least 2 points per axis");
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n), -1.0);
  const double h = 2.0 / (per_axis - 1);
  while (true) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = idx[i] == per_axis - 1 ? 1.0 : -1.0 + h * idx[i];
    fn(std::span<const double>(x));
    std::size_t d = x.size();
    while (d > 0) {
      --d;
      if (++idx[d] < per_axis) break;
      idx[d] = 0;
      if (d == 0) return;
    }
  }
}

/// max |f(x) - approx(x)| over the uniform tensor grid with endpoints.
template <class F>
double uniform_error(F&& f, const ChebApproximation& a, int grid_per_axis) {
  const ApproxEvaluator eval(a);
  double worst = 0.0;
  for_each_grid_point(a.n(), grid_per_axis, [&](std::span<const double> x) {
    worst = std::max(worst, std::abs(f(x) - eval(x)));
  });
  return worst;
}

/// 2 (1 + pi/sqrt 2) omega_f(sigma_r).
inline double prop1_bound(const std::function<double(double)>& omega_f, double sigma_r) {
  return 2.0 * (1.0 + std::numbers::pi / std::numbers::sqrt2) * omega_f(sigma_r);
}

/// n (1 - cos(n pi / (r + n))), valid for r >= n.
inline double conv_rate_bound(int n, int r) {
  if (n < 1 || r < n) throw ParameterError("conv_rate_bound: requires r >= n >= 1");
  return n * (1.0 - std::cos(n * std::numbers::pi / (r + n)));
}

/// Product of n copies of the degree-r univariate minimum-resolution kernel,
/// resolution n(1 - cos(pi/(r+2))).
inline double product_kpm_resolution(int n, int r_uni) {
  return n * (1.0 - std::cos(std::numbers::pi / (r_uni + 2.0)));
}

}  // namespace kernels
}  // namespace minres
