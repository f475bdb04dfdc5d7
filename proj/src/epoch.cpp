#include "dsnav/epoch.hpp"

#include <charconv>
#include <cstdint>

#include "dsnav/errors.hpp"

namespace dsnav {
namespace {

// Howard Hinnant's civil-to-days algorithm: days since 1970-01-01.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

[[noreturn]] void bad(const std::string& text) {
    throw ConfigError("bad ISO-8601 date-time '" + text + "' (want YYYY-MM-DD[THH:MM:SS[.frac]])");
}

long parse_int(const std::string& text, std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) bad(text);
    long v = 0;
    const auto* first = s.data() + pos;
    auto [p, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || p != first + len) bad(text);
    return v;
}

}  // namespace

double iso8601_to_seconds(const std::string& text) {
    const std::string_view s = text;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') bad(text);
    const long year = parse_int(text, s, 0, 4);
    const long month = parse_int(text, s, 5, 2);
    const long day = parse_int(text, s, 8, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31) bad(text);

    long hh = 0, mm = 0, ss = 0;
    double frac = 0.0;
    if (s.size() > 10) {
        if (s[10] != 'T' || s.size() < 19 || s[13] != ':' || s[16] != ':') bad(text);
        hh = parse_int(text, s, 11, 2);
        mm = parse_int(text, s, 14, 2);
        ss = parse_int(text, s, 17, 2);
        if (hh > 23 || mm > 59 || ss > 60) bad(text);
        if (s.size() > 19) {
            if (s[19] != '.' || s.size() == 20) bad(text);
            double scale = 0.1;
            for (std::size_t i = 20; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9') bad(text);
                frac += (s[i] - '0') * scale;
                scale *= 0.1;
            }
        }
    }

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return static_cast<double>(days) * 86400.0 + hh * 3600.0 + mm * 60.0 + ss + frac;
}

}  // namespace dsnav
