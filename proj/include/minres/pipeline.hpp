#pragma once

// One-call construction of a minimum-resolution kernel: assemble the full or
// the symmetry-reduced SDP, solve it and extract the coefficients.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/functions.hpp"
#include "minres/kernels.hpp"
#include "minres/sdp_model.hpp"
#include "minres/sdp_solver.hpp"
#include "minres/symmetry.hpp"

namespace minres {

enum class SymmetryMode { On, Off, Both };

inline SymmetryMode symmetry_mode_from_string(const std::string& s) {
  if (s == "on") return SymmetryMode::On;
  if (s == "off") return SymmetryMode::Off;
  if (s == "both") return SymmetryMode::Both;
  throw ParameterError("symmetry must be on, off or both (got '" + s + "')");
}

struct KernelSolveOptions {
  SymmetryMode symmetry = SymmetryMode::On;
  std::optional<int> r_gram;
  sdp::SolverConfig solver;
  std::uint64_t seed = kDefaultBlockSeed;
  std::size_t cap = kDefaultSizeCap;
  double agreement_tol = 1e-6;  // full vs reduced optimum in Both mode
};

struct ModelStats {
  std::vector<int> block_dims;
  std::size_t constraints = 0;
  int iterations = 0;
  double objective = 0.0;  // optimum including the offset
  double seconds = 0.0;
};

struct KernelSolve {
  KernelCoefficients kernel;
  double sigma2 = 0.0;  // resolution of the extracted kernel
  std::optional<ModelStats> full;
  std::optional<ModelStats> reduced;
};

namespace detail {

inline ModelStats stats_of(const sdp::SdpProblem& p, const sdp::SdpSolution& s, double seconds) {
  return {p.block_dims, p.num_constraints(), s.iterations, s.objective_value, seconds};
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline KernelSolve solve_full_kernel(int n, int r, const KernelSolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const FullSdp model = build_full_sdp(n, r, opt.r_gram, opt.cap);
  const auto sol = sdp::solve(model.problem, opt.solver);
  KernelCoefficients k = extract_coefficients(model, sol);
  const double s2 = kernels::resolution(k);
  return {std::move(k), s2, detail::stats_of(model.problem, sol, detail::elapsed(t0)), std::nullopt};
}

inline KernelSolve solve_reduced_kernel(int n, int r, const KernelSolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReducedSdp model = build_reduced_sdp(n, r, opt.r_gram, opt.seed, opt.cap);
  const auto sol = sdp::solve(model.problem, opt.solver);
  KernelCoefficients k = extract_coefficients_reduced(model, sol);
  const double s2 = kernels::resolution(k);
  return {std::move(k), s2, std::nullopt, detail::stats_of(model.problem, sol, detail::elapsed(t0))};
}

/// Minimum-resolution kernel of degree r in n variables. In Both mode the
/// reduced kernel is returned after checking that both optima agree.
inline KernelSolve solve_kernel(int n, int r, const KernelSolveOptions& opt = {}) {
  switch (opt.symmetry) {
    case SymmetryMode::Off: return solve_full_kernel(n, r, opt);
    case SymmetryMode::On: return solve_reduced_kernel(n, r, opt);
    case SymmetryMode::Both: break;
  }
  KernelSolve full = solve_full_kernel(n, r, opt);
  KernelSolve red = solve_reduced_kernel(n, r, opt);
  red.full = full.full;
  const double diff = std::abs(full.full->objective - red.reduced->objective);
  if (diff > opt.agreement_tol)
    throw InconsistentSolution("full and reduced optima differ by " + std::to_string(diff));
  return red;
}

enum class KernelKind { Sdp, Product, Fejer, Dirichlet };

inline KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "sdp") return KernelKind::Sdp;
  if (s == "product") return KernelKind::Product;
  if (s == "fejer") return KernelKind::Fejer;
  if (s == "dirichlet") return KernelKind::Dirichlet;
  throw ParameterError("kernel must be sdp, product, fejer or dirichlet (got '" + s + "')");
}

/// Degree-r kernel in n variables of the requested family. Product and Fejer
/// kernels are n-fold products of univariate degree r/n kernels, so r must be
/// a multiple of n.
inline KernelCoefficients make_kernel(KernelKind kind, int n, int r, const KernelSolveOptions& opt = {}) {
  if (n < 1 || r < 0) throw ParameterError("make_kernel: need n >= 1 and r >= 0");
  auto product_of = [&](auto univariate) {
    if (r % n != 0)
      throw ParameterError("product kernels need r divisible by n (r = " + std::to_string(r) +
                           ", n = " + std::to_string(n) + ")");
    if (n == 1) return univariate(r);
    return kernels::product_kernel(std::vector<KernelCoefficients>(static_cast<std::size_t>(n), univariate(r / n)));
  };
  switch (kind) {
    case KernelKind::Sdp: return solve_kernel(n, r, opt).kernel;
    case KernelKind::Product: return product_of([](int d) { return kernels::kpm_jackson(d); });
    case KernelKind::Fejer: return product_of([](int d) { return kernels::fejer(d); });
    case KernelKind::Dirichlet: return kernels::dirichlet(n, r);
  }
  throw ParameterError("make_kernel: unknown kernel kind");
}

/// Max |f - K^(r) f| on the uniform grid with endpoints.
inline double approximation_error(const TargetFunction& f, const KernelCoefficients& k, int grid) {
  if (f.n != 0 && f.n != k.n())
    throw ParameterError("function '" + f.name + "' is defined for n = " + std::to_string(f.n) + ", kernel has n = " +
                         std::to_string(k.n()));
  const auto c = cheb::cheb_coeffs([&](std::span<const double> x) { return f(x); }, k.index_ptr(),
                                   cheb::default_nodes(k.r()));
  return kernels::uniform_error(f, kernels::apply_kernel(k, c), grid);
}

}  // namespace minres
