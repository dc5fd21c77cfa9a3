#include "newsmotion/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

using nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line_no);
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string", line_no);
  return it->get<std::string>();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

Article parse_article(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw ParseError("record is not an object", line_no);

  Article a;
  a.id = required_string(obj, "id", line_no);
  const auto date_text = required_string(obj, "date", line_no);
  a.title = required_string(obj, "title", line_no);
  a.body = required_string(obj, "body", line_no);
  a.source = required_string(obj, "source", line_no);

  const auto date = Date::try_parse(date_text);
  if (!date) {
    throw ValidationError("line " + std::to_string(line_no) + ": invalid date '" + date_text + "'");
  }
  a.date = *date;
  if (trim(a.title).empty()) {
    throw ValidationError("line " + std::to_string(line_no) + ": empty title");
  }
  return a;
}

std::string format_article(const Article& article) {
  // ordered_json keeps the documented key order in the output.
  nlohmann::ordered_json obj;
  obj["id"] = article.id;
  obj["date"] = article.date.to_string();
  obj["title"] = article.title;
  obj["body"] = article.body;
  obj["source"] = article.source;
  return obj.dump();
}

void for_each_article(const std::filesystem::path& path,
                      const std::function<void(Article&&)>& sink) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    sink(parse_article(line, line_no));
  }
}

std::vector<Article> load_articles(const std::filesystem::path& path) {
  std::vector<Article> articles;
  for_each_article(path, [&](Article&& a) { articles.push_back(std::move(a)); });
  return articles;
}

void write_articles(const std::filesystem::path& path, std::span<const Article> articles) {
  auto out = open_output(path);
  for (const auto& a : articles) out << format_article(a) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

PriceSeries::PriceSeries(std::string ticker, std::vector<PricePoint> observations)
    : ticker_(std::move(ticker)), observations_(std::move(observations)) {
  if (ticker_.empty()) throw ValidationError("empty ticker");
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& p = observations_[i];
    if (!(p.close > 0.0) || !std::isfinite(p.close)) {
      throw ValidationError(ticker_ + ": close on " + p.date.to_string() + " must be positive");
    }
    if (i > 0 && !(observations_[i - 1].date < p.date)) {
      throw ValidationError(ticker_ + ": dates not strictly ascending at " + p.date.to_string());
    }
  }
}

std::optional<std::size_t> PriceSeries::last_on_or_before(Date d) const {
  auto it = std::upper_bound(observations_.begin(), observations_.end(), d,
                             [](Date value, const PricePoint& p) { return value < p.date; });
  if (it == observations_.begin()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(observations_.begin(), it) - 1);
}

std::optional<std::size_t> PriceSeries::first_after(Date d) const {
  auto it = std::upper_bound(observations_.begin(), observations_.end(), d,
                             [](Date value, const PricePoint& p) { return value < p.date; });
  if (it == observations_.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(observations_.begin(), it));
}

std::optional<double> PriceSeries::close_on(Date d) const {
  const auto i = last_on_or_before(d);
  if (!i || observations_[*i].date != d) return std::nullopt;
  return observations_[*i].close;
}

NormStats compute_norm_stats(std::span<const double> closes) {
  NormStats s;
  s.count = closes.size();
  if (closes.empty()) return s;
  double sum = 0.0;
  for (double c : closes) sum += c;
  s.mean = sum / static_cast<double>(closes.size());
  double sq = 0.0;
  for (double c : closes) sq += (c - s.mean) * (c - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(closes.size()));
  return s;
}

PriceTable::PriceTable(std::vector<PriceSeries> series, DateRange training_window)
    : training_window_(training_window) {
  if (training_window.empty()) throw ValidationError("empty training window");
  for (auto& s : series) {
    std::vector<double> closes;
    for (const auto& p : s.observations()) {
      if (training_window.contains(p.date)) closes.push_back(p.close);
    }
    if (closes.size() >= 2) {
      const auto stats = compute_norm_stats(closes);
      if (stats.std > 0.0) stats_.emplace(s.ticker(), stats);
    }
    const std::string name = s.ticker();
    if (!series_.emplace(name, std::move(s)).second) {
      throw ValidationError("duplicate series for ticker " + name);
    }
  }
}

const PriceSeries* PriceTable::find(std::string_view ticker) const {
  const auto it = series_.find(ticker);
  return it == series_.end() ? nullptr : &it->second;
}

const PriceSeries& PriceTable::at(std::string_view ticker) const {
  if (const auto* s = find(ticker)) return *s;
  throw ValidationError("unknown ticker " + std::string(ticker));
}

std::optional<NormStats> PriceTable::stats(std::string_view ticker) const {
  const auto it = stats_.find(ticker);
  if (it == stats_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> PriceTable::tickers() const {
  std::vector<std::string> out;
  out.reserve(series_.size());
  for (const auto& [ticker, _] : series_) out.push_back(ticker);
  return out;
}

std::vector<std::string> PriceTable::unnormalizable_tickers() const {
  std::vector<std::string> out;
  for (const auto& [ticker, _] : series_) {
    if (!stats_.contains(ticker)) out.push_back(ticker);
  }
  return out;
}

PriceTable load_prices(const std::filesystem::path& path, DateRange training_window) {
  if (training_window.empty()) throw ValidationError("empty training window");
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, std::vector<PricePoint>, std::less<>> rows;
  std::set<std::pair<std::string, int>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != "date,ticker,close") {
        throw ParseError("expected header 'date,ticker,close'", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(text, ',');
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
    const auto date = Date::try_parse(trim(fields[0]));
    if (!date) {
      throw ValidationError("line " + std::to_string(line_no) + ": invalid date '" +
                            std::string(fields[0]) + "'");
    }
    const std::string ticker(trim(fields[1]));
    if (ticker.empty()) throw ParseError("empty ticker", line_no);
    double close = 0.0;
    try {
      close = parse_double(fields[2]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!(close > 0.0) || !std::isfinite(close)) {
      throw ValidationError("line " + std::to_string(line_no) + ": close must be positive");
    }
    if (!seen.emplace(ticker, date->days()).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate row for " + ticker +
                            " on " + date->to_string());
    }
    rows[ticker].push_back({*date, close});
  }
  if (!header_seen) throw ParseError("missing header 'date,ticker,close'");

  std::vector<PriceSeries> series;
  series.reserve(rows.size());
  for (auto& [ticker, points] : rows) {
    std::sort(points.begin(), points.end(),
              [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
    series.emplace_back(ticker, std::move(points));
  }
  return PriceTable(std::move(series), training_window);
}

void write_prices(const std::filesystem::path& path, const PriceTable& table) {
  auto out = open_output(path);
  out << "date,ticker,close\n";
  for (const auto& [ticker, s] : table.series()) {
    for (const auto& p : s.observations()) {
      out << p.date.to_string() << ',' << ticker << ',' << format_double(p.close) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::pair<std::vector<double>, std::vector<double>> align_series(const PriceSeries& a,
                                                                 const PriceSeries& b,
                                                                 DateRange window) {
  std::pair<std::vector<double>, std::vector<double>> out;
  const auto xs = a.observations();
  const auto ys = b.observations();
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].date < ys[j].date) {
      ++i;
    } else if (ys[j].date < xs[i].date) {
      ++j;
    } else {
      if (window.contains(xs[i].date)) {
        out.first.push_back(xs[i].close);
        out.second.push_back(ys[j].close);
      }
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace newsmotion
