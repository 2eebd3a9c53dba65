#pragma once

// Chebyshev polynomials of the first kind on [-1,1]^n, the product Chebyshev
// measure mu and tensor Chebyshev-Gauss quadrature against it.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "minres/errors.hpp"
#include "minres/indexcomb.hpp"

namespace minres {

/// Values indexed by a shared N^n_r (coefficients c_alpha, g_alpha, b_alpha).
struct IndexedValues {
  std::shared_ptr<const IndexSet> index;
  std::vector<double> values;

  [[nodiscard]] int n() const { return index->n(); }
  [[nodiscard]] int r() const { return index->r(); }
  [[nodiscard]] std::size_t size() const { return values.size(); }

  /// Value at alpha; zero outside the support.
  [[nodiscard]] double at(const std::vector<int>& alpha) const {
    auto p = index->find(alpha);
    return p ? values[*p] : 0.0;
  }
  [[nodiscard]] double at(const MultiIndex& alpha) const { return at(alpha.entries()); }
};

namespace cheb {

inline constexpr double kDomainSlack = 1e-12;

inline double check_domain(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack))
    throw DomainError("Chebyshev evaluation outside [-1,1]: x = " + std::to_string(x));
  return std::clamp(x, -1.0, 1.0);
}

/// T_k(x) by the three-term recurrence.
inline double eval(int k, double x) {
  if (k < 0) throw ParameterError("cheb::eval: negative degree");
  x = check_domain(x);
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// T_0(x), ..., T_kmax(x).
inline std::vector<double> eval_all(int kmax, double x) {
  x = check_domain(x);
  std::vector<double> t(static_cast<std::size_t>(kmax) + 1);
  t[0] = 1.0;
  if (kmax >= 1) t[1] = x;
  for (int j = 2; j <= kmax; ++j) t[static_cast<std::size_t>(j)] = 2.0 * x * t[j - 1] - t[j - 2];
  return t;
}

/// T_alpha(x) = prod_i T_{alpha_i}(x_i).
inline double eval_multi(const MultiIndex& alpha, std::span<const double> x) {
  if (x.size() != alpha.size()) throw ParameterError("cheb::eval_multi: dimension mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) p *= eval(alpha[i], x[i]);
  return p;
}

/// c_alpha = (1/2)^H(alpha) = <T_alpha, T_alpha>_mu.
inline double norm_constant(const MultiIndex& alpha) { return std::ldexp(1.0, -alpha.hamming()); }

/// <T_alpha, T_beta>_mu, analytic.
inline double inner_product(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw ParameterError("cheb::inner_product: dimension mismatch");
  return a == b ? norm_constant(a) : 0.0;
}

/// Tensor Chebyshev-Gauss rule: nodes cos((2j-1)pi/(2m)), uniform weight (1/m)^n.
struct QuadratureRule {
  int n = 1;
  int m = 1;
  std::vector<double> nodes;  // univariate nodes, shared by every axis
  double weight = 1.0;

  [[nodiscard]] std::size_t point_count() const {
    std::size_t c = 1;
    for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(m);
    return c;
  }

  /// Coordinates of tensor point `flat` (axis 0 varies slowest).
  void point(std::size_t flat, std::span<double> out) const {
    for (int i = n - 1; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = nodes[flat % static_cast<std::size_t>(m)];
      flat /= static_cast<std::size_t>(m);
    }
  }
};

inline QuadratureRule gauss_rule(int n, int m) {
  if (n < 1 || m < 1) throw ParameterError("gauss_rule: need n >= 1 and m >= 1");
  QuadratureRule q;
  q.n = n;
  q.m = m;
  q.nodes.resize(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j)
    q.nodes[static_cast<std::size_t>(j - 1)] = std::cos((2.0 * j - 1.0) * std::numbers::pi / (2.0 * m));
  q.weight = std::pow(1.0 / m, n);
  return q;
}

/// Integral of f against mu by the tensor rule.
template <class F>
double integrate(F&& f, const QuadratureRule& q) {
  std::vector<double> x(static_cast<std::size_t>(q.n));
  double acc = 0.0;
  for (std::size_t p = 0; p < q.point_count(); ++p) {
    q.point(p, x);
    acc += f(std::span<const double>(x));
  }
  return acc * q.weight;
}

inline int default_nodes(int r) { return std::max(64, 4 * (r + 1)); }

/// c_alpha(f) = <f, T_alpha>_mu for all alpha in N^n_r, by m-point tensor
/// Chebyshev-Gauss quadrature. f must accept std::span<const double>.
template <class F>
IndexedValues cheb_coeffs(F&& f, std::shared_ptr<const IndexSet> index, int m) {
  const int n = index->n();
  const int r = index->r();
  if (m < r + 1)
    throw ParameterError("cheb_coeffs: need m >= r+1 nodes per axis (m = " + std::to_string(m) +
                         ", r = " + std::to_string(r) + ")");
  const QuadratureRule q = gauss_rule(n, m);
  const auto mm = static_cast<std::size_t>(m);
  const auto rr = static_cast<std::size_t>(r) + 1;

  std::vector<double> tensor(q.point_count());
  {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < tensor.size(); ++p) {
      q.point(p, x);
      tensor[p] = f(std::span<const double>(x));
    }
  }
  // tmat(k, j) = T_k(x_j)
  std::vector<double> tmat(rr * mm);
  for (std::size_t j = 0; j < mm; ++j) {
    const double theta = (2.0 * static_cast<double>(j) + 1.0) * std::numbers::pi / (2.0 * m);
    for (std::size_t k = 0; k < rr; ++k) tmat[k * mm + j] = std::cos(static_cast<double>(k) * theta);
  }
  // Contract one axis at a time: shape (m,...,m) -> (r+1,...,r+1).
  std::vector<std::size_t> dims(static_cast<std::size_t>(n), mm);
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
    for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
    std::vector<double> next(outer * rr * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t k = 0; k < rr; ++k) {
        double* dst = &next[(o * rr + k) * inner];
        for (std::size_t j = 0; j < mm; ++j) {
          const double t = tmat[k * mm + j];
          const double* src = &tensor[(o * mm + j) * inner];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += t * src[i];
        }
      }
    tensor = std::move(next);
    dims[axis] = rr;
  }
  IndexedValues c{index, std::vector<double>(index->size())};
  for (std::size_t p = 0; p < index->size(); ++p) {
    std::size_t flat = 0;
    for (int i = 0; i < n; ++i) flat = flat * rr + static_cast<std::size_t>((*index)[p][static_cast<std::size_t>(i)]);
    c.values[p] = tensor[flat] * q.weight;
  }
  return c;
}

template <class F>
IndexedValues cheb_coeffs(F&& f, int n, int r, int m) {
  return cheb_coeffs(std::forward<F>(f), std::make_shared<const IndexSet>(build_index_set(n, r)), m);
}

}  // namespace cheb
}  // namespace minres
