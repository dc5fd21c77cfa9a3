#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace newsmotion {

// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static Date from_days(int days) { return Date(days); }

  // Strict ISO-8601 "YYYY-MM-DD". Throws ValidationError.
  static Date parse(std::string_view text);
  static std::optional<Date> try_parse(std::string_view text);

  int days() const noexcept { return days_; }
  Date plus_days(int n) const noexcept { return Date(days_ + n); }
  // 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const;
  bool is_weekend() const { return weekday() == 0 || weekday() == 6; }

  std::chrono::year_month_day ymd() const;
  std::string to_string() const;

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  constexpr explicit Date(int days) : days_(days) {}
  int days_ = 0;
};

// Inclusive on both ends.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const noexcept { return first <= d && d <= last; }
  bool empty() const noexcept { return last < first; }

  // "YYYY-MM-DD..YYYY-MM-DD"
  std::string to_string() const;
  static DateRange parse(std::string_view text);

  friend bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace newsmotion
