#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwpe {

/// Machine-readable failure categories. The CLI prints `code_name()` verbatim.
enum class ErrorCode {
  dimension_mismatch,
  syntax,
  schema,
  duplicate_site,
  missing_site,
  probability_sum,
  nonpositive_probability,
  parameter_domain,
  not_irreducible,
  form_mismatch,
  singular,
  not_nearest_neighbour,
  not_reversible,
  path_dependence,
  line_dependence,
  zero_gradient,
  overflow,
  start_out_of_range,
  not_one_dimensional,
  all_censored,
  io,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rwpe
