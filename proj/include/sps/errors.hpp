#pragma once

#include <stdexcept>
#include <string>

namespace sps {

// Numeric values are part of the C API (see sps.h) and must stay stable.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  domain = 2,
  config = 3,
  quadrature = 4,
  convergence = 5,
  singular_matrix = 6,
  search_exhausted = 7,
  max_iterations = 8,
  ball_escape = 9,
  positivity_violation = 10,
  bound_violation = 11,
  certificate = 12,
  grid_mismatch = 13,
  missing_derivative = 14,
  io = 15,
  internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sps
