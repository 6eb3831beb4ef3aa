#pragma once

#include <stdexcept>
#include <string>

namespace tdhfb {

enum class ErrorCode {
  argument,
  numeric_domain,
  symmetry_violation,
  domain_too_small,
  grid_mismatch,
  numerical_blowup,
  stiffness,
  fit,
  truncation_insufficient,
  config,
  io,
};

const char* to_string(ErrorCode code);

// Single exception type for the core library; the C API maps codes to
// process exit statuses (config -> 1, numerical -> 2, truncation -> 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the integrator; carries the simulation time at which the state
// stopped being finite or the step size collapsed.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorCode code, double time, const std::string& what)
      : Error(code, what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace tdhfb
