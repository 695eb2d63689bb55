#include "sps/errors.hpp"

namespace sps {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::config: return "config";
    case ErrorCode::quadrature: return "quadrature";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::search_exhausted: return "search_exhausted";
    case ErrorCode::max_iterations: return "max_iterations";
    case ErrorCode::ball_escape: return "ball_escape";
    case ErrorCode::positivity_violation: return "positivity_violation";
    case ErrorCode::bound_violation: return "bound_violation";
    case ErrorCode::certificate: return "certificate";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::missing_derivative: return "missing_derivative";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace sps
