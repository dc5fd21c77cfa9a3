#include "newsmotion/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

namespace {

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_symbol_alias(std::string_view alias) {
  bool letter = false;
  for (char c : alias) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      letter = true;
    } else if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != '-') {
      return false;
    }
  }
  return letter;
}

std::string leading_word(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && is_word_char(s[n])) ++n;
  return to_lower(s.substr(0, n));
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::positive ? "positive" : "negative";
}

Label parse_label(std::string_view text) {
  if (text == "positive") return Label::positive;
  if (text == "negative") return Label::negative;
  throw ParseError("invalid label '" + std::string(text) + "'");
}

AbbreviationList::AbbreviationList(std::vector<std::string> entries) {
  for (auto& e : entries) entries_.insert(std::move(e));
}

AbbreviationList AbbreviationList::defaults() {
  return AbbreviationList({"Inc.", "Corp.", "Co.", "Ltd.", "Mr.", "Ms.", "Dr.", "U.S.", "vs."});
}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    entries.emplace_back(text);
  }
  return AbbreviationList(std::move(entries));
}

std::vector<std::string> split_sentences(std::string_view body,
                                         const AbbreviationList& abbreviations) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  const auto emit = [&](std::size_t end) {
    const auto s = trim(body.substr(start, end - start));
    if (!s.empty()) sentences.emplace_back(s);
    start = end;
  };

  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!is_terminator(body[i])) continue;
    std::size_t j = i + 1;
    while (j < body.size() && (is_terminator(body[j]) || is_closer(body[j]))) ++j;
    // "3.50" and "U.S" keep going: a boundary needs whitespace or the end next.
    if (j < body.size() && !is_space(body[j])) continue;

    if (body[i] == '.' && j == i + 1) {
      std::size_t w = i;
      while (w > start && !is_space(body[w - 1])) --w;
      std::string_view token = body.substr(w, i + 1 - w);
      while (!token.empty() && (token.front() == '(' || token.front() == '"')) {
        token.remove_prefix(1);
      }
      if (abbreviations.contains(token)) continue;
    }
    emit(j);
    i = j - 1;
  }
  emit(body.size());
  return sentences;
}

void AliasTable::add(std::string alias, std::string ticker) {
  alias = std::string(trim(alias));
  ticker = std::string(trim(ticker));
  if (alias.empty() || ticker.empty()) throw ValidationError("empty alias or ticker");
  if (!is_word_char(alias.front())) {
    throw ValidationError("alias '" + alias + "' must start with a letter or digit");
  }
  const bool symbol = is_symbol_alias(alias);
  const auto key = leading_word(alias);
  entries_.push_back({std::move(alias), std::move(ticker), symbol});
  auto& bucket = by_first_word_[key];
  bucket.push_back(entries_.size() - 1);
  std::stable_sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
    return entries_[a].alias.size() > entries_[b].alias.size();
  });
}

AliasTable AliasTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  AliasTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != "alias,ticker") throw ParseError("expected header 'alias,ticker'", line_no);
      header_seen = true;
      continue;
    }
    const auto comma = text.rfind(',');
    if (comma == std::string_view::npos) throw ParseError("expected 'alias,ticker'", line_no);
    try {
      table.add(std::string(text.substr(0, comma)), std::string(text.substr(comma + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return table;
}

std::vector<Mention> AliasTable::tag(std::string_view text) const {
  std::vector<Mention> mentions;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool word_start = is_word_char(text[i]) && (i == 0 || !is_word_char(text[i - 1]));
    if (!word_start) {
      ++i;
      continue;
    }
    std::size_t matched = 0;
    const auto bucket = by_first_word_.find(leading_word(text.substr(i)));
    if (bucket != by_first_word_.end()) {
      for (const auto idx : bucket->second) {
        const auto& e = entries_[idx];
        if (i + e.alias.size() > text.size()) continue;
        const auto candidate = text.substr(i, e.alias.size());
        const bool same = e.symbol ? candidate == e.alias : equals_ignore_case(candidate, e.alias);
        if (!same) continue;
        const std::size_t end = i + e.alias.size();
        if (is_word_char(e.alias.back()) && end < text.size() && is_word_char(text[end])) continue;
        mentions.push_back({e.ticker, i});
        matched = e.alias.size();
        break;
      }
    }
    if (matched > 0) {
      i += matched;
    } else {
      while (i < text.size() && is_word_char(text[i])) ++i;
    }
  }
  return mentions;
}

std::vector<std::string> AliasTable::tickers() const {
  std::set<std::string> unique;
  for (const auto& e : entries_) unique.insert(e.ticker);
  return {unique.begin(), unique.end()};
}

std::vector<Sentence> extract_sentences(std::span<const Article> articles, const AliasTable& aliases,
                                        const AbbreviationList& abbreviations) {
  std::vector<Sentence> out;
  for (const auto& article : articles) {
    for (auto& text : split_sentences(article.body, abbreviations)) {
      auto mentions = aliases.tag(text);
      if (mentions.empty()) continue;
      out.push_back({std::move(text), article.date, std::move(mentions)});
    }
  }
  return out;
}

std::optional<Label> movement_label(const PriceSeries& series, Date date) {
  const auto base = series.last_on_or_before(date);
  const auto next = series.first_after(date);
  if (!base || !next) return std::nullopt;
  const double from = series[*base].close;
  const double to = series[*next].close;
  if (to > from) return Label::positive;
  if (to < from) return Label::negative;
  return std::nullopt;
}

std::vector<Sample> build_samples(std::span<const Sentence> sentences, const PriceTable& prices) {
  std::map<std::pair<Date, std::string>, Sample> grouped;
  for (const auto& sentence : sentences) {
    std::set<std::string> tickers;
    for (const auto& m : sentence.mentions) tickers.insert(m.ticker);
    for (const auto& ticker : tickers) {
      auto& sample = grouped[{sentence.article_date, ticker}];
      if (sample.sentences.empty()) {
        sample.ticker = ticker;
        sample.date = sentence.article_date;
      }
      sample.sentences.push_back(sentence);
    }
  }

  std::vector<Sample> samples;
  samples.reserve(grouped.size());
  for (auto& [key, sample] : grouped) {
    if (const auto* series = prices.find(sample.ticker)) {
      sample.label = movement_label(*series, sample.date);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

DatasetSplit split_by_date(std::span<const Sample> samples, Date train_end, Date valid_end) {
  if (!(train_end < valid_end)) {
    throw ValidationError("train_end must precede valid_end");
  }
  DatasetSplit split;
  split.train_end = train_end;
  split.valid_end = valid_end;
  for (const auto& s : samples) {
    if (!s.label) continue;
    if (s.date <= train_end) {
      split.train.push_back(s);
    } else if (s.date <= valid_end) {
      split.validation.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : samples) {
    nlohmann::ordered_json obj;
    obj["ticker"] = s.ticker;
    obj["date"] = s.date.to_string();
    obj["label"] = s.label ? nlohmann::ordered_json(std::string(to_string(*s.label)))
                           : nlohmann::ordered_json(nullptr);
    auto sentences = nlohmann::ordered_json::array();
    for (const auto& sentence : s.sentences) {
      auto mentions = nlohmann::ordered_json::array();
      for (const auto& m : sentence.mentions) mentions.push_back({m.ticker, m.offset});
      sentences.push_back({{"text", sentence.text}, {"mentions", std::move(mentions)}});
    }
    obj["sentences"] = std::move(sentences);
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      Sample s;
      s.ticker = obj.at("ticker").get<std::string>();
      s.date = Date::parse(obj.at("date").get<std::string>());
      if (!obj.at("label").is_null()) s.label = parse_label(obj.at("label").get<std::string>());
      for (const auto& js : obj.at("sentences")) {
        Sentence sentence{js.at("text").get<std::string>(), s.date, {}};
        for (const auto& jm : js.at("mentions")) {
          sentence.mentions.push_back({jm.at(0).get<std::string>(), jm.at(1).get<std::size_t>()});
        }
        s.sentences.push_back(std::move(sentence));
      }
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed sample: ") + e.what(), line_no);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return samples;
}

}  // namespace newsmotion
