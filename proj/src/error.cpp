#include "nvscat/error.hpp"

namespace nvscat {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::unresolved_singularity: return "unresolved singularity";
    case ErrorCode::quadrature: return "quadrature error above threshold";
    case ErrorCode::nonconvergent: return "non-convergent";
    case ErrorCode::exceptional: return "exceptional point";
    case ErrorCode::memory_cap: return "memory cap";
    case ErrorCode::aliasing: return "aliasing guard";
    case ErrorCode::io: return "io";
    case ErrorCode::schema: return "schema";
  }
  return "unknown";
}

}  // namespace nvscat
