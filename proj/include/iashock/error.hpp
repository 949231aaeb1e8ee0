#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace iashock {

enum class ErrorKind
{
  InvalidArgument,
  NewtonDiverged,
  DomainTooShort,
  AmplitudeTooLarge,
  TailUnresolved,
  FarFieldMismatch,
  ComplexRates,
  SingularSystem,
  NotContracting,
  PositivityLost,
  CFLViolation,
  GridMismatch,
  ConfigError,
};

const char *to_string(ErrorKind kind);

class SolverError : public std::runtime_error
{
public:
  SolverError(ErrorKind kind, const std::string &what, std::vector<double> history = {})
    : std::runtime_error(what)
    , kind_(kind)
    , history_(std::move(history))
  {
  }

  ErrorKind kind() const { return kind_; }
  // residual or ratio history where the failing iteration keeps one
  const std::vector<double> &history() const { return history_; }

private:
  ErrorKind           kind_;
  std::vector<double> history_;
};

inline void require(bool ok, const std::string &what)
{
  if (!ok) throw SolverError(ErrorKind::InvalidArgument, what);
}

} // namespace iashock
