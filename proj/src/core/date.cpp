#include "lifebench/core/date.hpp"

#include <cstdio>

namespace lifebench {

Date date_from_ymd(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return Date{static_cast<std::int32_t>(era * 146097 + static_cast<int>(doe) - 719468)};
}

void ymd_from_date(Date date, int& year, int& month, int& day) {
    std::int64_t z = date.days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

std::string format_date(Date d) {
    int y, m, dd;
    ymd_from_date(d, y, m, dd);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, dd);
    return buf;
}

std::optional<Date> parse_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
    y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    m = (s[5] - '0') * 10 + (s[6] - '0');
    d = (s[8] - '0') * 10 + (s[9] - '0');
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    Date r = date_from_ymd(y, m, d);
    int y2, m2, d2;
    ymd_from_date(r, y2, m2, d2);
    if (y2 != y || m2 != m || d2 != d) return std::nullopt;  // e.g. Feb 30
    return r;
}

std::string format_timestamp(std::int64_t ts) {
    Date d = date_of_timestamp(ts);
    std::int64_t sec = ts - static_cast<std::int64_t>(d.days) * 86400;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                  static_cast<int>(sec / 3600), static_cast<int>(sec / 60 % 60),
                  static_cast<int>(sec % 60));
    return buf;
}

std::optional<std::int64_t> parse_timestamp(const std::string& s) {
    if (s.size() == 10) {
        auto d = parse_date(s);
        if (!d) return std::nullopt;
        return static_cast<std::int64_t>(d->days) * 86400;
    }
    if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
        return std::nullopt;
    auto d = parse_date(s.substr(0, 10));
    if (!d) return std::nullopt;
    for (int i : {11, 12, 14, 15, 17, 18})
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
    int hh = (s[11] - '0') * 10 + (s[12] - '0');
    int mm = (s[14] - '0') * 10 + (s[15] - '0');
    int ss = (s[17] - '0') * 10 + (s[18] - '0');
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return static_cast<std::int64_t>(d->days) * 86400 + hh * 3600 + mm * 60 + ss;
}

}  // namespace lifebench
