#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "newsmotion/data_ingest.hpp"
#include "newsmotion/date.hpp"

namespace newsmotion {

// positive = price-up, negative = price-down.
enum class Label { positive, negative };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);
inline Label invert(Label l) { return l == Label::positive ? Label::negative : Label::positive; }

struct Mention {
  std::string ticker;
  std::size_t offset = 0;  // byte offset into the sentence text

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Sentence {
  std::string text;
  Date article_date;
  std::vector<Mention> mentions;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Sample {
  std::string ticker;
  Date date;
  std::vector<Sentence> sentences;
  std::optional<Label> label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
  Date train_end;
  Date valid_end;
};

// Tokens such as "Inc." or "U.S." whose final period does not end a sentence.
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::vector<std::string> entries);

  static AbbreviationList defaults();
  // One abbreviation per line; '#' starts a comment.
  static AbbreviationList load(const std::filesystem::path& path);

  bool contains(std::string_view token) const { return entries_.contains(std::string(token)); }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

std::vector<std::string> split_sentences(std::string_view body, const AbbreviationList& abbreviations);

// Surface names ("Apple") match case-insensitively; symbols ("AAPL", any alias
// made only of capitals, digits, '.' and '-') match case-sensitively. Matches
// must sit on word boundaries and the longest alias wins at each position.
class AliasTable {
 public:
  void add(std::string alias, std::string ticker);
  // CSV with header `alias,ticker`.
  static AliasTable load(const std::filesystem::path& path);

  std::vector<Mention> tag(std::string_view text) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<std::string> tickers() const;

 private:
  struct Entry {
    std::string alias;
    std::string ticker;
    bool symbol = false;
  };
  std::vector<Entry> entries_;
  // lowercased leading word -> entry indices, longest alias first
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_word_;
};

inline std::vector<Mention> tag_mentions(std::string_view text, const AliasTable& aliases) {
  return aliases.tag(text);
}

// Splits every article body and keeps the sentences that mention a ticker.
std::vector<Sentence> extract_sentences(std::span<const Article> articles, const AliasTable& aliases,
                                        const AbbreviationList& abbreviations);

// Movement from the last close on or before `date` to the first close after it;
// nullopt on a tie or when either close is missing.
std::optional<Label> movement_label(const PriceSeries& series, Date date);

// One sample per distinct (date, ticker), ordered by date then ticker.
std::vector<Sample> build_samples(std::span<const Sentence> sentences, const PriceTable& prices);

// Labeled samples only; upper bounds inclusive. Requires train_end < valid_end.
DatasetSplit split_by_date(std::span<const Sample> samples, Date train_end, Date valid_end);

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> load_samples(const std::filesystem::path& path);

}  // namespace newsmotion
