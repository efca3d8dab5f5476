#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tradelab {

/// Marker for positions where a value has not (yet) been computed: an
/// insufficient lookback, a zero-volatility window, a missing decision.
/// Undefined values propagate through arithmetic; they are never zero-filled.
inline double undefined() { return std::numeric_limits<double>::quiet_NaN(); }

inline bool is_defined(double x) { return !std::isnan(x); }

/// Real-valued series aligned to some date axis; NaN marks undefined entries.
using Series = std::vector<double>;

inline std::size_t count_defined(const Series& s) {
    std::size_t n = 0;
    for (double v : s)
        if (is_defined(v)) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Calendar dates

/// Proleptic Gregorian calendar day. Comparison is lexicographic on
/// (year, month, day); day arithmetic goes through days_from_civil.
struct Date {
    int year = 0;
    int month = 0;   // 1..12
    int day = 0;     // 1..31

    friend bool operator==(const Date&, const Date&) = default;
    friend auto operator<=>(const Date&, const Date&) = default;
};

/// Days since 1970-01-01 (negative before). Howard Hinnant's civil algorithm.
inline std::int64_t days_from_civil(const Date& d) {
    std::int64_t y = d.year;
    const int m = d.month;
    const int dd = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);              // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;             // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

/// Whole days from `from` to `to` (positive when `to` is later).
inline std::int64_t days_between(const Date& from, const Date& to) {
    return days_from_civil(to) - days_from_civil(from);
}

inline bool is_valid_date(const Date& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int len = lengths[d.month - 1];
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) len = 29;
    return d.day <= len;
}

/// Parses strict ISO-8601 `YYYY-MM-DD`. Throws std::invalid_argument otherwise.
inline Date parse_date(std::string_view text) {
    auto fail = [&] {
        throw std::invalid_argument("invalid ISO-8601 date: '" + std::string(text) + "'");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    auto digits = [&](int from, int to) {
        int v = 0;
        for (int i = from; i < to; ++i) {
            const char c = text[static_cast<std::size_t>(i)];
            if (c < '0' || c > '9') fail();
            v = v * 10 + (c - '0');
        }
        return v;
    };
    Date d{digits(0, 4), digits(5, 7), digits(8, 10)};
    if (!is_valid_date(d)) fail();
    return d;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace tradelab
