#include "tracechain/time_util.hpp"

#include <array>
#include <cstdio>

#include "tracechain/errors.hpp"

namespace tracechain {

namespace {

// Civil-time conversions (proleptic Gregorian), exact for the whole int64
// day range; no timezone or libc dependence.
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
    y += (m <= 2);
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr std::array<unsigned, 12> lengths{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

} // namespace

std::string format_utc(UnixSeconds t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    if (year < 1 || year > 9999) {
        raise(Errc::invalid_record, "timestamp year out of range 0001..9999");
    }
    const unsigned hh = static_cast<unsigned>(rem / 3600);
    const unsigned mm = static_cast<unsigned>((rem % 3600) / 60);
    const unsigned ss = static_cast<unsigned>(rem % 60);
    char buf[
        sizeof("YYYY-MM-DDTHH:MM:SSZ")];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02u:%02u:%02uZ",
                  static_cast<long long>(year), month, day, hh, mm, ss);
    return buf;
}

UnixSeconds parse_utc(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ, fixed width
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':'
        || s[16] != ':' || s[19] != 'Z') {
        raise(Errc::invalid_record, "timestamp must be YYYY-MM-DDTHH:MM:SSZ");
    }
    const auto num = [&](std::size_t pos, std::size_t len) -> std::int64_t {
        const std::string_view part = s.substr(pos, len);
        if (!all_digits(part)) {
            raise(Errc::invalid_record, "timestamp contains non-digit");
        }
        std::int64_t v = 0;
        for (char c : part) v = v * 10 + (c - '0');
        return v;
    };
    const std::int64_t year = num(0, 4);
    const std::int64_t month = num(5, 2);
    const std::int64_t day = num(8, 2);
    const std::int64_t hh = num(11, 2);
    const std::int64_t mm = num(14, 2);
    const std::int64_t ss = num(17, 2);
    if (year < 1 || month < 1 || month > 12) {
        raise(Errc::invalid_record, "timestamp month out of range");
    }
    if (day < 1 || day > days_in_month(year, static_cast<unsigned>(month))) {
        raise(Errc::invalid_record, "timestamp day out of range");
    }
    if (hh > 23 || mm > 59 || ss > 59) {
        raise(Errc::invalid_record, "timestamp time out of range");
    }
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400
        + hh * 3600 + mm * 60 + ss;
}

} // namespace tracechain
