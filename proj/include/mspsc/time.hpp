#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace mspsc {

using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)"; fractional seconds
// are truncated. Throws Error{ParseError}.
Timestamp parse_rfc3339(std::string_view text);

// Always emits UTC with a literal 'Z'.
std::string format_rfc3339(Timestamp t);

// Whole days since 1970-01-01 (UTC), floored.
std::int64_t day_number(Timestamp t) noexcept;

Timestamp start_of_day(Timestamp t) noexcept;

}  // namespace mspsc
