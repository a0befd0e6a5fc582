#include "chlab/errors.hpp"

namespace chlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::KappaZero: return "KappaZero";
    case ErrorKind::EpsZero: return "EpsZero";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::BarrierBreach: return "BarrierBreach";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::Interrupted: return "Interrupted";
  }
  return "Unknown";
}

}  // namespace chlab
