#pragma once

// Primal-dual interior-point method (HKM search direction, Mehrotra
// predictor-corrector) for block-diagonal SDPs in standard form.
//
//   primal: min <C,X>  s.t. <A_k,X> = b_k, X psd
//   dual:   max b'y    s.t. S = C - sum_k y_k A_k psd
//
// With block weights w_b the central path is X_b S_b = w_b mu I, which is the
// path of the unreduced problem when block b stands for w_b equal copies.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "minres/errors.hpp"
#include "minres/sdp_problem.hpp"

namespace minres::sdp {

struct SolverConfig {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iters = 200;
  double step_fraction = 0.98;
  double divergence_bound = 1e12;
  bool verbose = false;
  std::ostream* log = nullptr;  // defaults to std::cerr when verbose

  void validate() const {
    if (!(tol_gap > 0.0) || !(tol_feas > 0.0)) throw ParameterError("SolverConfig: tolerances must be positive");
    if (!(step_fraction > 0.0 && step_fraction < 1.0))
      throw ParameterError("SolverConfig: step_fraction must lie in (0, 1)");
    if (max_iters < 1) throw ParameterError("SolverConfig: max_iters must be positive");
    if (!(divergence_bound > 0.0)) throw ParameterError("SolverConfig: divergence_bound must be positive");
  }
};

inline constexpr int kRefinementPasses = 2;

namespace detail {

struct ConstraintRef {
  std::size_t constraint;
  std::size_t part;
};

inline std::optional<DenseMatrix> cholesky_lower(const DenseMatrix& m) {
  Eigen::LLT<DenseMatrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  DenseMatrix l = llt.matrixL();
  if (!l.allFinite()) return std::nullopt;
  return l;
}

inline bool is_positive_definite(const BlockMatrix& m) {
  for (const auto& b : m)
    if (b.rows() > 0 && !cholesky_lower(b)) return false;
  return true;
}

/// Largest alpha with X + alpha dX psd (infinity if unbounded), given L = chol(X).
inline double max_step(const std::vector<DenseMatrix>& chol, const BlockMatrix& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < d.size(); ++b) {
    if (d[b].rows() == 0) continue;
    const auto& l = chol[b];
    DenseMatrix w = l.triangularView<Eigen::Lower>().solve(d[b]);
    w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
    w = 0.5 * (w + w.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(w, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < 0) alpha = std::min(alpha, -1.0 / lo);
  }
  return alpha;
}

inline void symmetrize(BlockMatrix& m) {
  for (auto& b : m) b = 0.5 * (b + b.transpose()).eval();
}

}  // namespace detail

class HkmSolver {
 public:
  HkmSolver(const SdpProblem& problem, SolverConfig config) : p_(problem), cfg_(config) {
    p_.validate();
    cfg_.validate();
    m_ = p_.constraints.size();
    by_block_.assign(p_.block_dims.size(), {});
    for (std::size_t k = 0; k < m_; ++k)
      for (std::size_t q = 0; q < p_.constraints[k].parts.size(); ++q)
        by_block_[p_.constraints[k].parts[q].block].push_back({k, q});
    b_ = Eigen::Map<const Eigen::VectorXd>(p_.rhs.data(), static_cast<Eigen::Index>(m_));
    b_inf_ = m_ ? b_.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& part : p_.objective.parts) c_norm_ += part.squared_norm() / p_.weight(part.block);
    c_norm_ = std::sqrt(c_norm_);
  }

  SdpSolution solve() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostream& log = cfg_.log ? *cfg_.log : std::cerr;
    const auto& dims = p_.block_dims;
    const double order = p_.weighted_order();

    // X = I / order, S = I in unreduced terms (S carries the block weight).
    BlockMatrix X = zeros_like(dims);
    BlockMatrix S = zeros_like(dims);
    for (std::size_t b = 0; b < dims.size(); ++b) {
      X[b].diagonal().setConstant(1.0 / order);
      S[b].diagonal().setConstant(p_.weight(b));
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));

    SdpSolution best;
    double last_ap = 0.0;
    double last_ad = 0.0;
    double best_score = std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
      // Residuals and progress measures.
      const Eigen::VectorXd ax = apply_A(X);
      const Eigen::VectorXd rp = b_ - ax;
      BlockMatrix rd = zeros_like(dims);
      p_.objective.add_to(rd, 1.0);
      for (std::size_t k = 0; k < m_; ++k) p_.constraints[k].add_to(rd, -y(static_cast<Eigen::Index>(k)));
      for (std::size_t b = 0; b < dims.size(); ++b) rd[b] -= S[b];

      const double pobj = p_.objective.dot(X);
      const double dobj = m_ ? b_.dot(y) : 0.0;
      const double xs = inner(X, S);
      const double mu = xs / order;
      SdpSolution cur;
      cur.primal_objective = pobj;
      cur.dual_objective = dobj;
      cur.objective_value = pobj + p_.offset;
      cur.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      cur.primal_residual = (m_ ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + b_inf_);
      double rd_norm2 = 0.0;
      for (std::size_t b = 0; b < dims.size(); ++b) rd_norm2 += rd[b].squaredNorm() / p_.weight(b);
      cur.dual_residual = std::sqrt(rd_norm2) / (1.0 + c_norm_);
      cur.complementarity = xs / (1.0 + std::abs(pobj));
      cur.iterations = iter;

      if (cfg_.verbose)
        log << "iter " << std::setw(3) << iter << std::scientific << std::setprecision(3) << "  pobj "
            << std::setw(11) << pobj << "  dobj " << std::setw(11) << dobj << "  gap " << cur.gap << "  pinf "
            << cur.primal_residual << "  dinf " << cur.dual_residual << "  mu " << mu << std::fixed
            << std::setprecision(3) << "  step " << last_ap << '/' << last_ad << std::defaultfloat << '\n';

      const double score = std::max({cur.gap, cur.complementarity, cur.primal_residual, cur.dual_residual});
      const bool converged = cur.gap <= cfg_.tol_gap && cur.complementarity <= cfg_.tol_gap &&
                             cur.primal_residual <= cfg_.tol_feas && cur.dual_residual <= cfg_.tol_feas;
      if (converged || score < best_score) {
        best_score = score;
        best = cur;
        best.X = X;
        best.S = S;
        best.y = y;
      }
      if (converged) break;

      double x_trace = 0.0;
      for (const auto& blk : X) x_trace += blk.trace();
      if (!std::isfinite(x_trace) || x_trace > cfg_.divergence_bound ||
          (m_ && y.cwiseAbs().maxCoeff() > cfg_.divergence_bound))
        throw InfeasibilityError("SDP iterates diverge (trace X = " + std::to_string(x_trace) +
                                 "); the problem appears infeasible or unbounded");
      if (iter >= cfg_.max_iters)
        throw NonConvergence("SDP solver reached the iteration limit", iter, best.gap, best.primal_residual,
                             best.dual_residual);

      // Factorizations.
      std::vector<DenseMatrix> lx(dims.size());
      std::vector<DenseMatrix> ls(dims.size());
      BlockMatrix Z(dims.size());
      for (std::size_t b = 0; b < dims.size(); ++b) {
        auto cx = detail::cholesky_lower(X[b]);
        auto cs = detail::cholesky_lower(S[b]);
        if (!cx || !cs) throw NumericalFailure("SDP iterate lost positive definiteness");
        lx[b] = *cx;
        ls[b] = *cs;
        DenseMatrix linv = ls[b].triangularView<Eigen::Lower>().solve(DenseMatrix::Identity(dims[b], dims[b]));
        Z[b] = linv.transpose() * linv;
      }

      const DenseMatrix schur = build_schur(X, Z);
      Eigen::LLT<DenseMatrix> llt(schur);
      std::optional<Eigen::LDLT<DenseMatrix>> ldlt;
      if (llt.info() != Eigen::Success) {
        ldlt.emplace(schur);
        if (ldlt->info() != Eigen::Success) throw NumericalFailure("Schur complement factorization failed");
      }
      auto schur_solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
        Eigen::VectorXd sol = ldlt ? Eigen::VectorXd(ldlt->solve(rhs)) : Eigen::VectorXd(llt.solve(rhs));
        if (!sol.allFinite()) throw NumericalFailure("Schur complement solve produced non-finite values");
        return sol;
      };

      // X Rd Z is shared by predictor and corrector.
      BlockMatrix xrdz(dims.size());
      for (std::size_t b = 0; b < dims.size(); ++b) xrdz[b] = X[b] * rd[b] * Z[b];

      // P = target*Z - X - X Rd Z - extra;  M dy = rp - A(P);
      // dS = Rd - A'dy;  dX = target*Z - X - extra - X dS Z.
      auto direction = [&](double target, const BlockMatrix* extra, BlockMatrix& dX, Eigen::VectorXd& dy,
                           BlockMatrix& dS) {
        BlockMatrix pm(dims.size());
        for (std::size_t b = 0; b < dims.size(); ++b) {
          pm[b] = target * p_.weight(b) * Z[b] - X[b] - xrdz[b];
          if (extra) pm[b] -= (*extra)[b];
        }
        dy = schur_solve(rp - apply_A(pm));
        auto complete = [&] {
          dS = rd;
          for (std::size_t k = 0; k < m_; ++k) p_.constraints[k].add_to(dS, -dy(static_cast<Eigen::Index>(k)));
          dX.resize(dims.size());
          for (std::size_t b = 0; b < dims.size(); ++b) {
            dX[b] = target * p_.weight(b) * Z[b] - X[b] - X[b] * dS[b] * Z[b];
            if (extra) dX[b] -= (*extra)[b];
          }
          detail::symmetrize(dX);
          detail::symmetrize(dS);
        };
        complete();
        // Iterative refinement: the Schur matrix is ill-conditioned near the
        // optimum, so correct dy against the exact residual of A(dX) = rp.
        for (int pass = 0; pass < kRefinementPasses && m_; ++pass) {
          const Eigen::VectorXd res = rp - apply_A(dX);
          if (res.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + b_inf_)) break;
          dy += schur_solve(res);
          complete();
        }
      };

      auto step_lengths = [&](const BlockMatrix& dX, const BlockMatrix& dS) {
        const double ap = std::min(1.0, cfg_.step_fraction * detail::max_step(lx, dX));
        const double ad = std::min(1.0, cfg_.step_fraction * detail::max_step(ls, dS));
        return std::pair{ap, ad};
      };

      // Predictor.
      BlockMatrix dXa;
      BlockMatrix dSa;
      Eigen::VectorXd dya;
      direction(0.0, nullptr, dXa, dya, dSa);
      auto [apa, ada] = step_lengths(dXa, dSa);
      double mu_aff = 0.0;
      for (std::size_t b = 0; b < dims.size(); ++b)
        mu_aff += (X[b] + apa * dXa[b]).cwiseProduct(S[b] + ada * dSa[b]).sum();
      mu_aff /= order;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      // Corrector.
      BlockMatrix extra(dims.size());
      for (std::size_t b = 0; b < dims.size(); ++b) extra[b] = dXa[b] * dSa[b] * Z[b];
      BlockMatrix dX;
      BlockMatrix dS;
      Eigen::VectorXd dy;
      direction(sigma * mu, &extra, dX, dy, dS);
      auto [ap, ad] = step_lengths(dX, dS);

      // Safeguard: shrink until both iterates factor.
      BlockMatrix xn;
      BlockMatrix sn;
      bool accepted = false;
      for (int tries = 0; tries < 30; ++tries) {
        xn = X;
        sn = S;
        for (std::size_t b = 0; b < dims.size(); ++b) {
          xn[b] += ap * dX[b];
          sn[b] += ad * dS[b];
        }
        detail::symmetrize(xn);
        detail::symmetrize(sn);
        if (detail::is_positive_definite(xn) && detail::is_positive_definite(sn)) {
          accepted = true;
          break;
        }
        ap *= 0.5;
        ad *= 0.5;
      }
      if (!accepted) throw NumericalFailure("SDP step could not keep the iterates positive definite");
      X = std::move(xn);
      S = std::move(sn);
      y += ad * dy;
      last_ap = ap;
      last_ad = ad;
    }

    best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
  }

 private:
  Eigen::VectorXd apply_A(const BlockMatrix& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(m_));
    for (std::size_t k = 0; k < m_; ++k) out(static_cast<Eigen::Index>(k)) = p_.constraints[k].dot(x);
    return out;
  }

  // M_ij = sum_b <A_ib, X_b A_jb Z_b>.
  DenseMatrix build_schur(const BlockMatrix& X, const BlockMatrix& Z) const {
    const auto mm = static_cast<Eigen::Index>(m_);
    DenseMatrix schur = DenseMatrix::Zero(mm, mm);
    for (std::size_t b = 0; b < by_block_.size(); ++b) {
      const auto& refs = by_block_[b];
      for (std::size_t u = 0; u < refs.size(); ++u) {
        const auto& pi = p_.constraints[refs[u].constraint].parts[refs[u].part];
        const DenseMatrix g = pi.sandwich(X[b], Z[b]);
        const auto i = static_cast<Eigen::Index>(refs[u].constraint);
        for (std::size_t v = u; v < refs.size(); ++v) {
          const auto j = static_cast<Eigen::Index>(refs[v].constraint);
          schur(i, j) += p_.constraints[refs[v].constraint].parts[refs[v].part].dot(g);
        }
      }
    }
    // Parts were visited in constraint order per block, so only the upper
    // triangle (i <= j) was filled; mirror it.
    for (Eigen::Index i = 0; i < mm; ++i)
      for (Eigen::Index j = i + 1; j < mm; ++j) {
        const double s = schur(i, j) + schur(j, i);
        schur(i, j) = s;
        schur(j, i) = s;
      }
    return schur;
  }

  const SdpProblem& p_;
  SolverConfig cfg_;
  std::size_t m_ = 0;
  std::vector<std::vector<detail::ConstraintRef>> by_block_;
  Eigen::VectorXd b_;
  double b_inf_ = 0.0;
  double c_norm_ = 0.0;
};

inline SdpSolution solve(const SdpProblem& problem, const SolverConfig& config = {}) {
  return HkmSolver(problem, config).solve();
}

}  // namespace minres::sdp
