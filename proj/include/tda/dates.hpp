#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tda {

// A calendar day (UTC), stored as days since 1970-01-01.
class Date {
public:
    Date() = default;
    explicit constexpr Date(int32_t days) : days_(days) {}

    static Date from_ymd(int year, int month, int day);
    // Parses strict ISO-8601 YYYY-MM-DD; nullopt on anything else.
    static std::optional<Date> parse(std::string_view iso);

    std::string to_string() const;  // YYYY-MM-DD

    constexpr int32_t count() const { return days_; }
    int year() const;
    int month() const;
    int day() const;

    friend constexpr Date operator+(Date a, int32_t n) { return Date(a.days_ + n); }
    friend constexpr Date operator-(Date a, int32_t n) { return Date(a.days_ - n); }
    friend constexpr int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
    Date& operator+=(int32_t n) {
        days_ += n;
        return *this;
    }
    Date& operator++() {
        ++days_;
        return *this;
    }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    int32_t days_ = 0;
};

// A calendar month, used as a grouping key.
struct YearMonth {
    int year = 0;
    int month = 0;
    std::string to_string() const;  // YYYY-MM
    friend constexpr auto operator<=>(YearMonth, YearMonth) = default;
};

YearMonth year_month_of(Date d);

}  // namespace tda
