#pragma once

#include <stdexcept>
#include <string>

namespace posgain {

// Base class for all library errors so callers can catch posgain::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise malformed numeric input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix/signal dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Lifting order N < 1.
class InvalidOrder : public Error {
 public:
  using Error::Error;
};

// perron_vector called with require_nonneg on a matrix with entries < -1e-9.
class NotNonnegative : public Error {
 public:
  using Error::Error;
};

// Operation requires a Schur stable system.
class UnstableSystem : public Error {
 public:
  using Error::Error;
};

// COP-tagged constraint reached the solver; use the PSD+NN relaxation.
class UnsupportedCone : public Error {
 public:
  using Error::Error;
};

// pos_matnorm_exact_small beyond 4 columns (exactness of PSD+NN breaks).
class ColumnCountExceeded : public Error {
 public:
  using Error::Error;
};

// SystemFile / CLI input could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The conic solver could not produce a usable result.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// Filesystem write failure (output path, temp file, rename).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace posgain
