#include "iashock/error.hpp"

namespace iashock {

const char *to_string(ErrorKind kind)
{
  switch (kind) {
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::NewtonDiverged: return "NewtonDiverged";
  case ErrorKind::DomainTooShort: return "DomainTooShort";
  case ErrorKind::AmplitudeTooLarge: return "AmplitudeTooLarge";
  case ErrorKind::TailUnresolved: return "TailUnresolved";
  case ErrorKind::FarFieldMismatch: return "FarFieldMismatch";
  case ErrorKind::ComplexRates: return "ComplexRates";
  case ErrorKind::SingularSystem: return "SingularSystem";
  case ErrorKind::NotContracting: return "NotContracting";
  case ErrorKind::PositivityLost: return "PositivityLost";
  case ErrorKind::CFLViolation: return "CFLViolation";
  case ErrorKind::GridMismatch: return "GridMismatch";
  case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

} // namespace iashock
