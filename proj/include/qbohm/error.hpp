#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbohm {

enum class ErrorKind {
  degenerate_grid,
  grid_mismatch,
  non_finite,
  zero_density,
  fully_singular,
  insufficient_support,
  probe_generation,
  unsupported_ansatz,
  step_size,
  out_of_range,
  node_breakdown,
  linear_solve,
  phase_anchor,
  outside_domain,
  too_few_paths,
  invalid_argument,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

/// All library failures are reported through this type; `kind()` lets callers
/// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qbohm
