#pragma once

#include <stdexcept>
#include <string>

namespace jetlab {

// Every rejected input or failed internal consistency check surfaces as this
// type. `code()` is a short machine-readable category ("precondition",
// "shape_mismatch", "domain", "parse", "convergence", "stage_failure", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace jetlab
