#include "newsmotion/date.hpp"

#include <charconv>
#include <cstdio>

#include "newsmotion/errors.hpp"

namespace newsmotion {

namespace {

bool parse_fixed_digits(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
  }
  return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::optional<Date> Date::try_parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed_digits(text.substr(0, 4), y) || !parse_fixed_digits(text.substr(5, 2), m) ||
      !parse_fixed_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse(std::string_view text) {
  if (auto d = try_parse(text)) return *d;
  throw ValidationError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
}

unsigned Date::weekday() const {
  return std::chrono::weekday{std::chrono::sys_days{std::chrono::days{days_}}}.c_encoding();
}

std::chrono::year_month_day Date::ymd() const {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
}

std::string Date::to_string() const {
  const auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(v.year()),
                static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
  return buf;
}

std::string DateRange::to_string() const { return first.to_string() + ".." + last.to_string(); }

DateRange DateRange::parse(std::string_view text) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) {
    throw ValidationError("invalid date range '" + std::string(text) + "' (expected FIRST..LAST)");
  }
  return DateRange{Date::parse(text.substr(0, sep)), Date::parse(text.substr(sep + 2))};
}

}  // namespace newsmotion
