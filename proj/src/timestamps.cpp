#include "xferfolio/timestamps.hpp"

#include <cstdio>

#include "xferfolio/errors.hpp"

namespace xferfolio {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

bool parse_fixed_digits(const std::string& s, std::size_t pos, std::size_t count, int& out) {
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    // Howard Hinnant's algorithm, valid across the proleptic Gregorian calendar.
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

std::int64_t day_number(std::int64_t epoch_seconds) {
    std::int64_t d = epoch_seconds / kSecondsPerDay;
    if (epoch_seconds % kSecondsPerDay < 0) --d;
    return d;
}

std::int64_t parse_timestamp(const std::string& text) {
    // Accepted forms: YYYY-MM-DD, YYYY-MM-DDTHH:MM:SS, either with trailing Z.
    std::string s = text;
    if (!s.empty() && s.back() == 'Z') s.pop_back();

    int year = 0, month = 0, day = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-' || !parse_fixed_digits(s, 0, 4, year) ||
        !parse_fixed_digits(s, 5, 2, month) || !parse_fixed_digits(s, 8, 2, day)) {
        throw ParseError("bad timestamp: " + text);
    }
    if (month < 1 || month > 12 || day < 1 || day > 31) {
        throw ParseError("bad timestamp: " + text);
    }

    int hour = 0, minute = 0, second = 0;
    if (s.size() > 10) {
        if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
            !parse_fixed_digits(s, 11, 2, hour) || !parse_fixed_digits(s, 14, 2, minute) ||
            !parse_fixed_digits(s, 17, 2, second)) {
            throw ParseError("bad timestamp: " + text);
        }
        if (hour > 23 || minute > 59 || second > 60) {
            throw ParseError("bad timestamp: " + text);
        }
    }

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return days * kSecondsPerDay + hour * 3600 + minute * 60 + second;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    const std::int64_t days = day_number(epoch_seconds);
    std::int64_t rem = epoch_seconds - days * kSecondsPerDay;
    int year = 0;
    unsigned month = 0, day = 0;
    civil_from_days(days, year, month, day);
    const int hour = static_cast<int>(rem / 3600);
    const int minute = static_cast<int>((rem % 3600) / 60);
    const int second = static_cast<int>(rem % 60);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", year, month, day, hour,
                  minute, second);
    return buf;
}

}  // namespace xferfolio
