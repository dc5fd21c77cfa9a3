#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsmotion/date.hpp"

namespace newsmotion {

struct Article {
  std::string id;
  Date date;
  std::string title;
  std::string body;
  std::string source;

  friend bool operator==(const Article&, const Article&) = default;
};

// Articles file: one JSON object per line with keys id, date, title, body, source.
// Blank lines are skipped; errors carry the 1-based line number.
Article parse_article(std::string_view line, std::size_t line_no);
std::string format_article(const Article& article);
void for_each_article(const std::filesystem::path& path,
                      const std::function<void(Article&&)>& sink);
std::vector<Article> load_articles(const std::filesystem::path& path);
void write_articles(const std::filesystem::path& path, std::span<const Article> articles);

struct PricePoint {
  Date date;
  double close = 0.0;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

// Closing prices of one ticker, strictly ascending by date, all closes > 0.
class PriceSeries {
 public:
  PriceSeries(std::string ticker, std::vector<PricePoint> observations);

  const std::string& ticker() const noexcept { return ticker_; }
  std::span<const PricePoint> observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }
  const PricePoint& operator[](std::size_t i) const { return observations_[i]; }

  // Index of the last observation dated on or before `d`.
  std::optional<std::size_t> last_on_or_before(Date d) const;
  // Index of the first observation dated strictly after `d`.
  std::optional<std::size_t> first_after(Date d) const;
  std::optional<double> close_on(Date d) const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::string ticker_;
  std::vector<PricePoint> observations_;
};

// Population statistics (denominator n) of training-window closes.
struct NormStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;

  double normalize(double close) const { return (close - mean) / std; }
  friend bool operator==(const NormStats&, const NormStats&) = default;
};

NormStats compute_norm_stats(std::span<const double> closes);

class PriceTable {
 public:
  PriceTable() = default;
  PriceTable(std::vector<PriceSeries> series, DateRange training_window);

  const PriceSeries* find(std::string_view ticker) const;
  const PriceSeries& at(std::string_view ticker) const;
  // nullopt when the ticker has fewer than two training closes or zero spread.
  std::optional<NormStats> stats(std::string_view ticker) const;
  bool normalizable(std::string_view ticker) const { return stats(ticker).has_value(); }

  std::vector<std::string> tickers() const;
  std::vector<std::string> unnormalizable_tickers() const;
  const std::map<std::string, PriceSeries, std::less<>>& series() const noexcept { return series_; }
  const DateRange& training_window() const noexcept { return training_window_; }
  std::size_t size() const noexcept { return series_.size(); }

  friend bool operator==(const PriceTable&, const PriceTable&) = default;

 private:
  std::map<std::string, PriceSeries, std::less<>> series_;
  std::map<std::string, NormStats, std::less<>> stats_;
  DateRange training_window_;
};

// Prices file: CSV with header `date,ticker,close`.
PriceTable load_prices(const std::filesystem::path& path, DateRange training_window);
// Rows sorted by ticker, then date.
void write_prices(const std::filesystem::path& path, const PriceTable& table);

// Closes on the dates both series share inside `window`, ordered by date.
std::pair<std::vector<double>, std::vector<double>> align_series(const PriceSeries& a,
                                                                 const PriceSeries& b,
                                                                 DateRange window);

}  // namespace newsmotion
