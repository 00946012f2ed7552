#pragma once

#include <stdexcept>
#include <string>

namespace rhombus {

enum class ErrorCode {
  Domain = 1,
  SingularConfiguration,
  StepSize,
  ToleranceNotMet,
  StepFailure,
  Bracketing,
  NonConvergence,
  Io,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rhombus
