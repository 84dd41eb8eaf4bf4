#pragma once

#include <stdexcept>
#include <string>

namespace xlab {

enum class ErrorKind {
  InvalidArgument,
  StepUnderflow,
  NonFiniteState,
  IntegrationFailure,
  NoBracket,
  PositivityLost,
  BadFit,
  RangeError,
  LinearSolveFailure,
  NewtonDivergence,
  DomainViolation,
  UnresolvedRegion,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace xlab
