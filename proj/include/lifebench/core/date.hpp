// Civil-date and timestamp helpers. Dates are days since 1970-01-01 (UTC);
// timestamps are unix seconds. All arithmetic is integer-exact.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lifebench {

struct Date {
    std::int32_t days = 0;  // days since 1970-01-01

    constexpr auto operator<=>(const Date&) const = default;

    Date operator+(int n) const { return Date{days + n}; }
    Date operator-(int n) const { return Date{days - n}; }
    int operator-(Date other) const { return days - other.days; }
};

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
Date date_from_ymd(int year, int month, int day);
void ymd_from_date(Date d, int& year, int& month, int& day);

std::string format_date(Date d);                       // "2021-03-01"
std::optional<Date> parse_date(const std::string& s);  // strict ISO-8601 date

// Timestamps: unix seconds, formatted "2021-03-01T08:30:00Z".
std::string format_timestamp(std::int64_t ts);
std::optional<std::int64_t> parse_timestamp(const std::string& s);

inline Date date_of_timestamp(std::int64_t ts) {
    // Floor division handles pre-epoch timestamps.
    std::int64_t d = ts / 86400;
    if (ts % 86400 < 0) --d;
    return Date{static_cast<std::int32_t>(d)};
}

struct TimeWindow {
    Date start;
    Date end;  // inclusive

    bool contains(Date d) const { return start <= d && d <= end; }
    int length() const { return end - start + 1; }
};

}  // namespace lifebench
