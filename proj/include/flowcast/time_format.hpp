#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace flowcast {

/// Formats epoch seconds as RFC 3339 UTC, e.g. "2015-03-15T08:30:00Z".
std::string format_rfc3339_utc(std::int64_t epoch_seconds);

/// Strict parser for the format emitted by format_rfc3339_utc.
/// Returns false on any deviation (wrong separators, out-of-range fields).
bool try_parse_rfc3339_utc(std::string_view text, std::int64_t& epoch_seconds);

/// Throwing wrapper around try_parse_rfc3339_utc (InputError).
std::int64_t parse_rfc3339_utc(std::string_view text);

/// Parses "YYYY-MM-DD" as midnight UTC of that day.
bool try_parse_date_utc(std::string_view text, std::int64_t& epoch_seconds);

}  // namespace flowcast
