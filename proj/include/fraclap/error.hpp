#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

enum class ErrorKind {
  precondition,
  invalid_order,
  invalid_exponent,
  divergent_weight,
  unsupported_order,
  aliasing,
  convergence,
  truncation,
  quadrature_failure,
  degenerate_input,
  calibration_failure,
  layer_resolution,
  solver,
  parse,
  validation,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI
/// in particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define FRACLAP_REQUIRE(cond, kind, msg)            \
  do {                                              \
    if (!(cond)) throw ::fraclap::Error((kind), (msg)); \
  } while (0)

}  // namespace fraclap
