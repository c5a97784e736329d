#pragma once

#include <stdexcept>
#include <string>

namespace hecke {

enum class ErrorCode {
  kZeroInput,
  kInvalidArgument,
  kSingularMatrix,
  kNotPositiveDefinite,
  kDependentConstraints,
  kValuationFailure,
  kMinorDivisibilityFailure,
  kIrrationalDetPower,
  kNoPointFound,
  kWindowExhausted,
  kInvariantViolation,
  kParse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hecke
