#include "flowcast/time_format.hpp"

#include <cstdio>

#include "flowcast/errors.hpp"

namespace flowcast {

namespace {

// Proleptic Gregorian day count relative to 1970-01-01 (Howard Hinnant's
// days_from_civil), valid far beyond any timestamp this toolkit handles.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned base[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return base[m - 1];
}

bool parse_civil_date(std::string_view s, std::int64_t& days) {
    unsigned y = 0, m = 0, d = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    if (!parse_fixed_uint(s, 0, 4, y) || !parse_fixed_uint(s, 5, 2, m) ||
        !parse_fixed_uint(s, 8, 2, d)) {
        return false;
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return false;
    days = days_from_civil(y, m, d);
    return true;
}

}  // namespace

std::string format_rfc3339_utc(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

bool try_parse_rfc3339_utc(std::string_view text, std::int64_t& epoch_seconds) {
    // Exactly "YYYY-MM-DDThh:mm:ssZ".
    if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
        text[19] != 'Z') {
        return false;
    }
    std::int64_t days = 0;
    if (!parse_civil_date(text, days)) return false;
    unsigned hh = 0, mm = 0, ss = 0;
    if (!parse_fixed_uint(text, 11, 2, hh) || !parse_fixed_uint(text, 14, 2, mm) ||
        !parse_fixed_uint(text, 17, 2, ss)) {
        return false;
    }
    if (hh > 23 || mm > 59 || ss > 59) return false;
    epoch_seconds = days * 86400 + hh * 3600 + mm * 60 + ss;
    return true;
}

std::int64_t parse_rfc3339_utc(std::string_view text) {
    std::int64_t out = 0;
    if (!try_parse_rfc3339_utc(text, out)) {
        throw InputError("invalid RFC 3339 UTC timestamp: '" + std::string(text) + "'");
    }
    return out;
}

bool try_parse_date_utc(std::string_view text, std::int64_t& epoch_seconds) {
    if (text.size() != 10) return false;
    std::int64_t days = 0;
    if (!parse_civil_date(text, days)) return false;
    epoch_seconds = days * 86400;
    return true;
}

}  // namespace flowcast
