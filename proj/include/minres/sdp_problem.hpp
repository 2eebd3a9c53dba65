#pragma once

// Block-diagonal standard-form SDP:
//   minimize <C, X> + offset  s.t.  <A_k, X> = b_k,  X = diag(X_1, ..., X_p) psd.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "minres/errors.hpp"

namespace minres::sdp {

using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Dense symmetric blocks conforming to SdpProblem::block_dims.
using BlockMatrix = std::vector<DenseMatrix>;

/// One symmetric block of a constraint or objective; full (both-triangle)
/// storage, sparse or dense.
struct BlockPart {
  std::size_t block = 0;
  bool is_sparse = true;
  SparseMatrix sparse;
  DenseMatrix dense;

  static BlockPart make_sparse(std::size_t block, SparseMatrix m) {
    BlockPart p;
    p.block = block;
    p.is_sparse = true;
    p.sparse = std::move(m);
    p.sparse.makeCompressed();
    return p;
  }

  static BlockPart make_dense(std::size_t block, DenseMatrix m) {
    BlockPart p;
    p.block = block;
    p.is_sparse = false;
    p.dense = std::move(m);
    return p;
  }

  [[nodiscard]] Eigen::Index rows() const { return is_sparse ? sparse.rows() : dense.rows(); }

  /// <A, X> for a dense X of the same order.
  [[nodiscard]] double dot(const DenseMatrix& x) const {
    if (!is_sparse) return dense.cwiseProduct(x).sum();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < sparse.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(sparse, c); it; ++it) acc += it.value() * x(it.row(), it.col());
    return acc;
  }

  /// x += alpha * A.
  void add_to(DenseMatrix& x, double alpha) const {
    if (!is_sparse) {
      x.noalias() += alpha * dense;
      return;
    }
    for (Eigen::Index c = 0; c < sparse.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(sparse, c); it; ++it) x(it.row(), it.col()) += alpha * it.value();
  }

  /// left * A * right.
  [[nodiscard]] DenseMatrix sandwich(const DenseMatrix& left, const DenseMatrix& right) const {
    DenseMatrix la = is_sparse ? DenseMatrix(left * sparse) : DenseMatrix(left * dense);
    return la * right;
  }

  [[nodiscard]] double squared_norm() const { return is_sparse ? sparse.squaredNorm() : dense.squaredNorm(); }

  [[nodiscard]] DenseMatrix to_dense() const { return is_sparse ? DenseMatrix(sparse) : dense; }
};

/// Sum of block parts; blocks not listed are zero.
struct BlockSymMatrix {
  std::vector<BlockPart> parts;

  [[nodiscard]] double dot(const BlockMatrix& x) const {
    double acc = 0.0;
    for (const auto& p : parts) acc += p.dot(x[p.block]);
    return acc;
  }

  void add_to(BlockMatrix& x, double alpha) const {
    for (const auto& p : parts) p.add_to(x[p.block], alpha);
  }

  [[nodiscard]] double squared_norm() const {
    double s = 0.0;
    for (const auto& p : parts) s += p.squared_norm();
    return s;
  }

  [[nodiscard]] bool empty() const { return parts.empty(); }
};

struct SdpProblem {
  std::vector<int> block_dims;
  BlockSymMatrix objective;
  std::vector<BlockSymMatrix> constraints;
  std::vector<double> rhs;
  double offset = 0.0;
  // Barrier weight per block (empty: all 1). A block standing for w identical
  // copies of a larger block-diagonal variable gets weight w, so the central
  // path matches the one of the unreduced problem.
  std::vector<double> block_weights;

  [[nodiscard]] std::size_t num_constraints() const { return constraints.size(); }
  [[nodiscard]] int total_order() const { return std::accumulate(block_dims.begin(), block_dims.end(), 0); }
  [[nodiscard]] double weight(std::size_t b) const { return block_weights.empty() ? 1.0 : block_weights[b]; }

  /// Sum of weight * order over blocks: the order of the unreduced variable.
  [[nodiscard]] double weighted_order() const {
    double o = 0.0;
    for (std::size_t b = 0; b < block_dims.size(); ++b) o += weight(b) * block_dims[b];
    return o;
  }

  /// Throws ParameterError if a part does not conform to block_dims.
  void validate() const {
    if (constraints.size() != rhs.size()) throw ParameterError("SdpProblem: constraint/rhs count mismatch");
    if (!block_weights.empty()) {
      if (block_weights.size() != block_dims.size()) throw ParameterError("SdpProblem: one barrier weight per block");
      for (double w : block_weights)
        if (!(w > 0.0)) throw ParameterError("SdpProblem: barrier weights must be positive");
    }
    auto check = [&](const BlockSymMatrix& m) {
      for (const auto& p : m.parts) {
        if (p.block >= block_dims.size()) throw ParameterError("SdpProblem: part refers to missing block");
        if (p.rows() != block_dims[p.block]) throw ParameterError("SdpProblem: part does not match block order");
      }
    };
    check(objective);
    for (const auto& c : constraints) check(c);
  }

  /// Plain-text dump for debugging; not a standard exchange format.
  void write_debug(std::ostream& os) const {
    os << "blocks";
    for (int d : block_dims) os << ' ' << d;
    os << "\nconstraints " << constraints.size() << "\noffset " << offset << '\n';
    auto dump = [&](const char* tag, const BlockSymMatrix& m, double b) {
      os << tag << " rhs " << b << '\n';
      for (const auto& p : m.parts) {
        const DenseMatrix d = p.to_dense();
        for (Eigen::Index i = 0; i < d.rows(); ++i)
          for (Eigen::Index j = i; j < d.cols(); ++j)
            if (d(i, j) != 0.0) os << "  " << p.block << ' ' << i << ' ' << j << ' ' << d(i, j) << '\n';
      }
    };
    dump("objective", objective, 0.0);
    for (std::size_t k = 0; k < constraints.size(); ++k) dump(("constraint " + std::to_string(k)).c_str(), constraints[k], rhs[k]);
  }
};

struct SdpSolution {
  BlockMatrix X;
  Eigen::VectorXd y;
  BlockMatrix S;
  double primal_objective = 0.0;  // <C,X>, offset excluded
  double dual_objective = 0.0;    // b'y
  double objective_value = 0.0;   // <C,X> + offset
  double gap = 0.0;               // relative duality gap
  double primal_residual = 0.0;   // max_k |<A_k,X> - b_k| / (1 + |b|_inf)
  double dual_residual = 0.0;     // |C - A'y - S|_F / (1 + |C|_F)
  double complementarity = 0.0;   // <X,S> / (1 + |<C,X>|)
  int iterations = 0;
  double seconds = 0.0;
};

inline BlockMatrix zeros_like(const std::vector<int>& dims) {
  BlockMatrix m;
  m.reserve(dims.size());
  for (int d : dims) m.push_back(DenseMatrix::Zero(d, d));
  return m;
}

inline double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

inline double min_eigenvalue(const BlockMatrix& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : m) {
    if (b.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(b, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
  }
  return lo;
}

}  // namespace minres::sdp
