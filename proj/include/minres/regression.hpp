#pragma once

// Regression suite: published reference values and structural properties,
// one criterion at a time, each with a runtime budget. Stretch targets are
// skipped unless explicitly enabled.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/functions.hpp"
#include "minres/kernels.hpp"
#include "minres/pipeline.hpp"
#include "minres/reference_data.hpp"
#include "minres/symmetry.hpp"

namespace minres::regress {

enum class Status { Pass, Fail, Skip };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skip: return "skip";
  }
  return "?";
}

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::Pass;
  std::string detail;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Options {
  bool stretch = false;  // run the stretch targets of criteria 6 and 7
  int grid = 501;        // error grid per axis for criterion 7
  std::set<int> only;    // empty: every criterion
  KernelSolveOptions solve;
  std::ostream* progress = nullptr;
  // Fixtures, replaceable for testing the suite itself.
  std::vector<reference::BlockRow> block_rows = reference::block_table();
  std::function<double(int, int)> univariate_formula = kernels::kpm_coefficient;
};

struct Report {
  std::vector<CriterionResult> criteria;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const {
    return std::none_of(criteria.begin(), criteria.end(),
                        [](const CriterionResult& c) { return c.status == Status::Fail; });
  }
};

inline nlohmann::json to_json(const Report& rep) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : rep.criteria)
    list.push_back({{"id", c.id},
                    {"name", c.name},
                    {"status", to_string(c.status)},
                    {"detail", c.detail},
                    {"warnings", c.warnings},
                    {"seconds", c.seconds},
                    {"budget_seconds", c.budget_seconds}});
  return {{"passed", rep.passed()}, {"seconds", rep.seconds}, {"criteria", std::move(list)}};
}

namespace detail {

/// Collects per-check failures into a criterion result.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }

  void check_close(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(10);
    os << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    check(std::isfinite(got) && std::abs(got - want) <= tol, os.str());
  }

  void note(const std::string& s) { notes_.push_back(s); }

  [[nodiscard]] Status status() const { return failures_.empty() ? Status::Pass : Status::Fail; }

  [[nodiscard]] std::string detail() const {
    std::ostringstream os;
    os << (checks_ - failures_.size()) << "/" << checks_ << " checks passed";
    for (const auto& n : notes_) os << "; " << n;
    for (std::size_t i = 0; i < failures_.size() && i < 8; ++i) os << "; FAIL " << failures_[i];
    if (failures_.size() > 8) os << "; ... " << failures_.size() - 8 << " more";
    return os.str();
  }

  [[nodiscard]] std::size_t checks() const { return checks_; }

 private:
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

inline std::string tag(int n, int r) { return "(" + std::to_string(n) + "," + std::to_string(r) + ")"; }

inline std::string tag(int n, int r, int rp) {
  return "(" + std::to_string(n) + "," + std::to_string(r) + "," + std::to_string(rp) + ")";
}

inline KernelSolveOptions with_mode(KernelSolveOptions o, SymmetryMode m, std::optional<int> r_gram = std::nullopt) {
  o.symmetry = m;
  o.r_gram = r_gram;
  return o;
}

// 1. Univariate SDP against the closed form.
inline void univariate(const Options& opt, Checker& c) {
  for (int r = 1; r <= 20; ++r) {
    const auto sol = solve_full_kernel(1, r, with_mode(opt.solve, SymmetryMode::Off));
    c.check_close(sol.sigma2, 1.0 - std::cos(std::numbers::pi / (r + 2.0)), 1e-7, "sigma2 n=1 r=" + std::to_string(r));
    double worst = 0.0;
    for (int k = 0; k <= r; ++k)
      worst = std::max(worst, std::abs(sol.kernel.at(std::vector<int>{k}) - opt.univariate_formula(k, r)));
    c.check_close(worst, 0.0, 1e-7, "max |g_k - closed form| r=" + std::to_string(r));
  }
}

// 2. Optimal resolutions via the reduced SDP.
inline void sigma_values(const Options& opt, Checker& c) {
  for (const auto& p : reference::sigma_table()) {
    const auto sol = solve_reduced_kernel(p.n, p.r, with_mode(opt.solve, SymmetryMode::On));
    c.check_close(sol.sigma2, p.sigma2, 1e-3, "sigma2 " + tag(p.n, p.r));
  }
}

// 3. Product-of-univariate column, closed form.
inline void product_values(const Options&, Checker& c) {
  for (const auto& p : reference::product_table()) {
    const int r_uni = p.degree / p.n;
    const double closed = kernels::product_kpm_resolution(p.n, r_uni);
    c.check_close(closed, p.sigma2, 1e-3, "product sigma2 n=" + std::to_string(p.n) + " deg=" + std::to_string(p.degree));
    const auto k = kernels::product_kernel(
        std::vector<KernelCoefficients>(static_cast<std::size_t>(p.n), kernels::kpm_jackson(r_uni)));
    c.check_close(kernels::resolution(k), closed, 1e-12, "resolution of the assembled product kernel");
  }
}

// 4. Block structure.
inline void block_structure(const Options& opt, Checker& c, std::vector<std::string>& warnings) {
  std::vector<std::pair<int, int>> wanted;
  for (int n = 2; n <= 4; ++n)
    for (int r = 1; r <= 6; ++r) wanted.emplace_back(n, r);
  wanted.emplace_back(5, 5);
  wanted.emplace_back(3, 10);
  for (const auto& [n, r] : wanted) {
    const auto row = std::find_if(opt.block_rows.begin(), opt.block_rows.end(),
                                  [&, n = n, r = r](const reference::BlockRow& b) { return b.n == n && b.r == r; });
    if (row == opt.block_rows.end()) {
      warnings.push_back("no reference row for " + tag(n, r) + ", skipped");
      continue;
    }
    const auto sb = compute_blocks(n, r, opt.solve.seed);
    std::ostringstream got;
    for (std::size_t i = 0; i < sb.dims.size(); ++i) got << (i ? "," : "") << sb.dims[i];
    c.check(sb.dims == row->dims && static_cast<int>(sb.s()) == row->s,
            "blocks " + tag(n, r) + ": got " + got.str() + " s=" + std::to_string(sb.s()));
  }
}

// 5. Full and reduced models agree.
inline void equivalence(const Options& opt, Checker& c) {
  const std::vector<std::pair<int, int>> cases = {{2, 1}, {2, 2}, {2, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 1},
                                                  {3, 2}, {3, 3}, {3, 4}, {4, 1}, {4, 2}, {4, 3}};
  for (const auto& [n, r] : cases) {
    const auto full = solve_full_kernel(n, r, with_mode(opt.solve, SymmetryMode::Off));
    const auto red = solve_reduced_kernel(n, r, with_mode(opt.solve, SymmetryMode::On));
    c.check_close(full.full->objective, red.reduced->objective, 1e-6, "optimum " + tag(n, r));
    double worst = 0.0;
    for (std::size_t p = 0; p < full.kernel.values().size(); ++p)
      worst = std::max(worst, std::abs(full.kernel.values()[p] - red.kernel.values()[p]));
    c.check_close(worst, 0.0, 1e-6, "max coefficient difference " + tag(n, r));
  }
}

// 6. Decoupled degrees.
inline void decoupled(const Options& opt, Checker& c) {
  for (const auto& d : reference::decoupled_table()) {
    const auto& p = d.point;
    if (d.stretch && !opt.stretch) {
      c.note("stretch target " + tag(p.n, p.r, p.r_gram) + " skipped");
      continue;
    }
    try {
      const auto sol = solve_reduced_kernel(p.n, p.r, with_mode(opt.solve, SymmetryMode::On, p.r_gram));
      c.check_close(sol.sigma2, p.sigma2, 1e-3, "sigma2 " + tag(p.n, p.r, p.r_gram));
    } catch (const ProblemTooLarge& e) {
      c.check(false, "stretch target " + tag(p.n, p.r, p.r_gram) + ": " + e.what());
    }
  }
}

// 7. Uniform approximation errors on [-1,1]^2.
inline void approximation_errors(const Options& opt, Checker& c) {
  for (const auto& e : reference::error_table()) {
    const std::string what = std::string(e.function) + " " + e.kernel + " r=" + std::to_string(e.r);
    if (e.stretch && !opt.stretch) {
      c.note("stretch target " + what + " skipped");
      continue;
    }
    try {
      const auto k = make_kernel(kernel_kind_from_string(e.kernel), 2, e.r, with_mode(opt.solve, SymmetryMode::On));
      const double err = approximation_error(builtin_function(e.function), k, opt.grid);
      c.check_close(err, e.error, 0.05 * e.error, "uniform error " + what);
    } catch (const ProblemTooLarge& ex) {
      c.check(false, "stretch target " + what + ": " + ex.what());
    }
  }
}

// 8. Properties of computed kernels.
inline void properties(const Options& opt, Checker& c) {
  std::mt19937_64 rng(opt.solve.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_point = [&](int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = unif(rng);
    return x;
  };

  // sdp kernels per (n, r) with r = 1..rmax[n].
  const std::vector<std::pair<int, int>> sweeps = {{1, 12}, {2, 10}, {3, 6}};
  std::map<std::pair<int, int>, KernelSolve> sols;
  for (const auto& [n, rmax] : sweeps)
    for (int r = 1; r <= rmax; ++r)
      sols.emplace(std::pair{n, r}, solve_kernel(n, r, with_mode(opt.solve, n == 1 ? SymmetryMode::Off : SymmetryMode::On)));
  sols.emplace(std::pair{2, -1}, solve_reduced_kernel(2, 3, with_mode(opt.solve, SymmetryMode::On, 4)));

  // Non-negativity sampling.
  for (const auto& key : {std::pair{1, 7}, std::pair{2, 4}, std::pair{2, 10}, std::pair{3, 3}, std::pair{2, -1}}) {
    const auto& k = sols.at(key).kernel;
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 100000; ++s) {
      const auto x = random_point(k.n());
      const auto y = random_point(k.n());
      lo = std::min(lo, kernels::eval_kernel(k, x, y));
    }
    c.check(lo >= -1e-6, "min sampled kernel value " + std::to_string(lo) + " at " + tag(k.n(), k.r()));
  }

  // Unit marginal integral.
  for (const auto& key : {std::pair{1, 12}, std::pair{2, 6}, std::pair{3, 4}}) {
    const auto& k = sols.at(key).kernel;
    const auto q = cheb::gauss_rule(k.n(), k.r() + 1);
    for (int t = 0; t < 10; ++t) {
      const auto x = random_point(k.n());
      const double mass = cheb::integrate([&](std::span<const double> y) { return kernels::eval_kernel(k, x, y); }, q);
      c.check_close(mass, 1.0, 1e-8, "marginal integral " + tag(k.n(), k.r()));
    }
  }

  // Resolution as a double integral, n <= 2 and r <= 8.
  for (const auto& key : {std::pair{1, 5}, std::pair{1, 8}, std::pair{2, 3}, std::pair{2, 8}}) {
    const auto& k = sols.at(key).kernel;
    const auto q = cheb::gauss_rule(k.n(), k.r() / 2 + 3);
    const double val = cheb::integrate(
        [&](std::span<const double> x) {
          return cheb::integrate(
              [&](std::span<const double> y) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
                return d2 * kernels::eval_kernel(k, x, y);
              },
              q);
        },
        q);
    c.check_close(val, kernels::resolution(k), 1e-6, "resolution integral " + tag(k.n(), k.r()));
  }

  // Permutation invariance, both models.
  for (const auto& [key, s] : sols)
    if (key.first > 1) c.check(s.kernel.is_permutation_invariant(1e-9), "permutation invariance (reduced) " + tag(key.first, key.second));
  for (const auto& [n, r] : {std::pair{2, 4}, std::pair{3, 3}}) {
    const auto full = solve_full_kernel(n, r, with_mode(opt.solve, SymmetryMode::Off));
    c.check(full.kernel.is_permutation_invariant(1e-6), "permutation invariance (full) " + tag(n, r));
  }

  // Monotone in r; convergence-rate bound for r >= n; product dominance.
  for (const auto& [n, rmax] : sweeps) {
    for (int r = 2; r <= rmax; ++r)
      c.check(sols.at({n, r}).sigma2 <= sols.at({n, r - 1}).sigma2 + 1e-7,
              "monotonicity " + tag(n, r - 1) + " -> " + tag(n, r));
    for (int r = n; r <= rmax; ++r)
      c.check(sols.at({n, r}).sigma2 <= kernels::conv_rate_bound(n, r) + 1e-7, "rate bound " + tag(n, r));
    for (int ru = 1; n * ru <= rmax; ++ru)
      c.check(kernels::product_kpm_resolution(n, ru) >= sols.at({n, n * ru}).sigma2 - 1e-7,
              "product dominance " + tag(n, n * ru));
  }

  // Closed form against the eigenvalue oracle.
  for (int r = 0; r <= 30; ++r) {
    const auto o = kernels::univariate_minres_oracle(r);
    double worst = 0.0;
    for (int k = 0; k <= r; ++k) worst = std::max(worst, std::abs(o.g[static_cast<std::size_t>(k)] - kernels::kpm_coefficient(k, r)));
    c.check_close(worst, 0.0, 1e-9, "oracle vs closed form r=" + std::to_string(r));
  }

  // Error bound dominates the measured uniform error.
  for (const std::string name : {"qsin", "peaks"}) {
    const auto f = builtin_function(name);
    for (int r = 1; r <= 10; ++r) {
      const auto& s = sols.at({2, r});
      const double err = approximation_error(f, s.kernel, 201);
      const double bound = kernels::prop1_bound([&](double d) { return f.omega(d); }, std::sqrt(s.sigma2));
      c.check(err <= bound, "error bound " + name + " r=" + std::to_string(r) + ": error " + std::to_string(err) +
                                " > bound " + std::to_string(bound));
    }
  }
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "univariate closed form", 10.0},
      {2, "optimal resolutions (reduced SDP)", 300.0},
      {3, "product-kernel resolutions", 1.0},
      {4, "block structure", 60.0},
      {5, "full vs reduced equivalence", 300.0},
      {6, "decoupled degrees", 300.0},
      {7, "uniform approximation errors", 300.0},
      {8, "kernel property suite", 300.0},
  };
  return list;
}

}  // namespace detail

inline CriterionResult run_criterion(int id, const Options& opt) {
  const auto& list = detail::criteria();
  const auto it = std::find_if(list.begin(), list.end(), [&](const detail::Criterion& c) { return c.id == id; });
  if (it == list.end()) throw ParameterError("no regression criterion " + std::to_string(id));
  CriterionResult res{it->id, it->name, Status::Pass, {}, {}, 0.0, it->budget_seconds};
  detail::Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: detail::univariate(opt, c); break;
      case 2: detail::sigma_values(opt, c); break;
      case 3: detail::product_values(opt, c); break;
      case 4: detail::block_structure(opt, c, res.warnings); break;
      case 5: detail::equivalence(opt, c); break;
      case 6: detail::decoupled(opt, c); break;
      case 7: detail::approximation_errors(opt, c); break;
      case 8: detail::properties(opt, c); break;
      default: break;
    }
  } catch (const Error& e) {
    c.check(false, std::string("error: ") + e.what());
  }
  res.seconds = minres::detail::elapsed(t0);
  res.status = c.status();
  res.detail = c.detail();
  if (c.checks() == 0 && res.status == Status::Pass) res.status = Status::Skip;
  if (res.status == Status::Pass && res.seconds > res.budget_seconds) {
    res.status = Status::Fail;
    res.detail += "; runtime " + std::to_string(res.seconds) + " s exceeds the budget";
  }
  return res;
}

inline Report run(const Options& opt) {
  Report rep;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : detail::criteria()) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    rep.criteria.push_back(run_criterion(c.id, opt));
    if (opt.progress) {
      const auto& r = rep.criteria.back();
      *opt.progress << "[" << to_string(r.status) << "] criterion " << r.id << " (" << r.name << ") "
                    << r.seconds << " s: " << r.detail << '\n';
      for (const auto& w : r.warnings) *opt.progress << "  warning: " << w << '\n';
    }
  }
  rep.seconds = minres::detail::elapsed(t0);
  return rep;
}

}  // namespace minres::regress
