#pragma once

#include <stdexcept>
#include <string>

namespace chlab {

/// Machine-readable failure category. Each category maps onto one CLI exit code.
enum class ErrorKind {
  NonZeroMean,
  GridMismatch,
  OutOfDomain,
  KappaZero,
  EpsZero,
  NoConvergence,
  NewtonDiverged,
  BarrierBreach,
  ParseError,
  ValidationError,
  IoError,
  Interrupted,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(K, what) {}
};

using NonZeroMean = TypedError<ErrorKind::NonZeroMean>;
using GridMismatch = TypedError<ErrorKind::GridMismatch>;
using OutOfDomain = TypedError<ErrorKind::OutOfDomain>;
using KappaZero = TypedError<ErrorKind::KappaZero>;
using EpsZero = TypedError<ErrorKind::EpsZero>;
using NoConvergence = TypedError<ErrorKind::NoConvergence>;
using NewtonDiverged = TypedError<ErrorKind::NewtonDiverged>;
using BarrierBreach = TypedError<ErrorKind::BarrierBreach>;
using IoError = TypedError<ErrorKind::IoError>;
using Interrupted = TypedError<ErrorKind::Interrupted>;

}  // namespace chlab
