#pragma once

#include <stdexcept>
#include <string>

namespace nvscat {

enum class ErrorCode {
  invalid_argument,
  unsupported,
  unresolved_singularity,
  quadrature,
  nonconvergent,
  exceptional,
  memory_cap,
  aliasing,
  io,
  schema,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nvscat
