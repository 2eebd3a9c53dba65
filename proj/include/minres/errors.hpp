#pragma once

#include <stdexcept>
#include <string>

namespace minres {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument combination (degree mismatch, bad node count, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Point outside the cube [-1,1]^n.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested index set exceeds the configured size cap.
class ProblemTooLarge : public Error {
 public:
  using Error::Error;
};

/// Factorization breakdown or eigen-solver failure.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Iteration limit hit before the tolerances were met.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations, double gap, double primal_residual,
                 double dual_residual)
      : Error(what),
        iterations(iterations),
        gap(gap),
        primal_residual(primal_residual),
        dual_residual(dual_residual) {}

  int iterations;
  double gap;
  double primal_residual;
  double dual_residual;
};

/// Divergent iterates, the problem looks primal or dual infeasible.
class InfeasibilityError : public Error {
 public:
  using Error::Error;
};

/// Solution fails a post-solve consistency check.
class InconsistentSolution : public Error {
 public:
  using Error::Error;
};

/// Symmetry-adapted basis does not block-diagonalize the invariant algebra.
class BasisQualityError : public Error {
 public:
  using Error::Error;
};

}  // namespace minres
