#pragma once

#include <stdexcept>
#include <string>

namespace gbdt {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix shapes or index ranges.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A pivot of a row-pivoted factorization fell below the singularity threshold.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot was not positive: the matrix is not positive definite.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& msg, double pivot)
      : Error(msg), pivot_(pivot) {}
  double pivot() const { return pivot_; }

 private:
  double pivot_;
};

/// An intermediate value left the representable floating-point range.
class Overflow : public Error {
 public:
  using Error::Error;
};

/// A supplied matrix failed the unitarity tolerance.
class NotUnitary : public Error {
 public:
  NotUnitary(const std::string& msg, int k) : Error(msg), k_(k) {}
  int index() const { return k_; }

 private:
  int k_;
};

/// z = 0 was requested where the step matrix I + (i/z)C is undefined.
class ZeroSpectralParameter : public Error {
 public:
  using Error::Error;
};

/// A requested evaluation point is too close to the spectrum of alpha.
class SpectralCollision : public Error {
 public:
  using Error::Error;
};

/// det S_k vanished in weak mode: hypothesis of the transformation violated.
class SingularS : public Error {
 public:
  SingularS(const std::string& msg, int k) : Error(msg), k_(k) {}
  int step() const { return k_; }

 private:
  int k_;
};

/// S_k lost positivity in strict mode; indicates numerical breakdown.
class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& msg, int k) : Error(msg), k_(k) {}
  int step() const { return k_; }

 private:
  int k_;
};

/// The unitary factorization of a transformed potential step failed.
class FactorizationFailure : public Error {
 public:
  FactorizationFailure(const std::string& msg, int k) : Error(msg), k_(k) {}
  int step() const { return k_; }

 private:
  int k_;
};

/// Malformed problem file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Unrecognized potential generator record.
class UnknownGenerator : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A structurally impossible request, e.g. factorization without unitaries.
class InvalidRequest : public Error {
 public:
  using Error::Error;
};

}  // namespace gbdt
