#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdfit {

enum class Errc {
  empty_curve,
  invalid_layer,
  no_intersection,
  no_intersection_in_domain,
  out_of_domain,
  numerical_error,
  invalid_problem,
  invalid_argument,
  empty_segment,
  parse_error,
  empty_corpus,
  empty_report,
  invalid_input,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the batch runner, the CLI) can decide between skip and abort.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sdfit
