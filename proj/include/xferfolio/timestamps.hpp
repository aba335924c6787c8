#pragma once

#include <cstdint>
#include <string>

namespace xferfolio {

/// Instants are UTC epoch seconds. Market data is handled at second
/// resolution; sub-second bars are out of scope.

/// Parses "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS" with an optional trailing
/// "Z". Throws ParseError on anything else.
std::int64_t parse_timestamp(const std::string& text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(std::int64_t epoch_seconds);

/// Calendar day number (days since 1970-01-01, floor for pre-epoch instants).
std::int64_t day_number(std::int64_t epoch_seconds);

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

}  // namespace xferfolio
