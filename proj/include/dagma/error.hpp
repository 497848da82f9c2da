#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dagma {

enum class ErrorCode {
  singular_matrix,
  out_of_domain,
  dimension_too_large,
  dimension_mismatch,
  non_binary_data,
  infeasible_density,
  cyclic_input,
  cyclic_truth,
  non_finite_gradient,
  non_finite_objective,
  domain_collapse,
  invalid_config,
  io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dagma
