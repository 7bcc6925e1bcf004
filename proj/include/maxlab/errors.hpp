#pragma once

#include <stdexcept>
#include <string>

namespace maxlab {

enum class errc {
  support_overflow,
  malformed_header,
  truncated_payload,
  dimension_overflow,
  empty_stencil,
  insufficient_radius_grid,
  invalid_alpha,
  invalid_q,
  domain_too_small,
  missing_good_ball,
  margin_overflow,
  zero_gradient_input,
  delta_zero,
  no_qualifying_ball,
  unsupported_case,
  io_failure,
  bad_argument,
};

// Single exception type carrying a machine-checkable code. The CLI maps
// io-flavoured codes to exit 2 and precondition violations to exit 3.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

  static bool is_io(errc c) {
    return c == errc::malformed_header || c == errc::truncated_payload ||
           c == errc::io_failure;
  }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace maxlab
