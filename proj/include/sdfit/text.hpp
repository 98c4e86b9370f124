#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sdfit {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Whole-field parse; nullopt on trailing characters or non-finite values.
std::optional<double> parse_double(std::string_view text);
std::optional<int> parse_int(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace sdfit
