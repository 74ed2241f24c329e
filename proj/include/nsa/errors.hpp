#pragma once

#include <stdexcept>
#include <string>

namespace nsa {

/// Base class for all failures raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// --- model ---

/// The Hamilton-map and companion-linearization root sets disagree.
class CrossCheckFailure : public Error {
 public:
  using Error::Error;
};

/// A pencil root sits on (or numerically too close to) the real axis,
/// which signals a non-invertible V / nontrivial singular space.
class RealRootError : public Error {
 public:
  using Error::Error;
};

/// The upper half plane does not hold exactly n pencil roots.
class CountMismatch : public Error {
 public:
  using Error::Error;
};

/// No lattice point satisfies the requested real-part bound.
class EmptyWindow : public Error {
 public:
  using Error::Error;
};

/// A lattice generator has |arg| >= pi/2.
class SectorViolation : public Error {
 public:
  using Error::Error;
};

/// Iterative and closed-form singular spaces differ; implementation bug.
class MismatchWithClosedForm : public Error {
 public:
  using Error::Error;
};

/// A pencil root lies within 0.1*radius of the integration contour.
class ContourTooClose : public Error {
 public:
  using Error::Error;
};

/// A contour count did not round to an integer within tolerance.
class NonIntegerResidual : public Error {
 public:
  using Error::Error;
};

// --- potential ---

/// A candidate minimum fails one of its defining conditions.
class NotAMinimum : public Error {
 public:
  using Error::Error;
};

/// sigma_min(V''(x_j)) below threshold.
class DegenerateHessian : public Error {
 public:
  using Error::Error;
};

// --- spectral ---

/// An eigenvalue solve at one shift failed to converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Two numerical eigenvalues are too close to the same model value.
class AmbiguousPairing : public Error {
 public:
  using Error::Error;
};

/// Another eigenvalue sits inside the safety annulus of a contour.
class AnnulusNotClean : public Error {
 public:
  using Error::Error;
};

/// Doubling the quadrature nodes moved the projection too much.
class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
};

// --- semigroup ---

/// The Krylov stepper could not reach its tolerance.
class StepFailure : public Error {
 public:
  using Error::Error;
};

/// Too few decay samples exceed the norm-estimation noise floor.
class NoiseFloor : public Error {
 public:
  using Error::Error;
};

// --- oracles ---

/// Consecutive contour nodes jump in argument by more than pi/2.
class ArgumentJump : public Error {
 public:
  using Error::Error;
};

// --- cli ---

/// Unreadable, malformed, or schema-violating configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsa
