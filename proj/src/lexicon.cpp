#include "newsmotion/lexicon.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"
#include "newsmotion/text.hpp"

namespace newsmotion {

namespace {

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

bool parse_flag(std::string_view text, std::size_t line_no) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw ParseError("seed_flag must be 0 or 1", line_no);
}

}  // namespace

const std::vector<std::string>& default_keyword_seeds() {
  static const std::vector<std::string> seeds = {"surge", "rise",   "shrink", "jump", "drop",
                                                 "fall",  "plunge", "gain",   "slump"};
  return seeds;
}

double smoothed_polarity(std::size_t df_pos, std::size_t df_neg, std::size_t n_pos,
                         std::size_t n_neg) {
  // Summing logs per side keeps the score exactly antisymmetric under a label swap.
  const double up = std::log(static_cast<double>(df_pos) + 1.0) +
                    std::log(static_cast<double>(n_neg) + 1.0);
  const double down = std::log(static_cast<double>(df_neg) + 1.0) +
                      std::log(static_cast<double>(n_pos) + 1.0);
  return up - down;
}

double smoothed_idf(std::size_t n_samples, std::size_t df) {
  return std::log((static_cast<double>(n_samples) + 1.0) / (static_cast<double>(df) + 1.0));
}

TrainingCounts TrainingCounts::from_samples(std::span<const Sample> samples) {
  TrainingCounts counts;
  for (const auto& sample : samples) {
    if (!sample.label) continue;
    const bool positive = *sample.label == Label::positive;
    (positive ? counts.n_pos_ : counts.n_neg_)++;
    std::unordered_set<std::string> seen;
    for (const auto& sentence : sample.sentences) {
      for (auto& token : tokenize(sentence.text)) seen.insert(std::move(token));
    }
    for (const auto& word : seen) {
      auto& c = counts.words_[word];
      ++c.df;
      (positive ? c.df_pos : c.df_neg)++;
    }
  }
  return counts;
}

TrainingCounts::WordCounts TrainingCounts::counts(std::string_view word) const {
  const auto it = words_.find(std::string(word));
  return it == words_.end() ? WordCounts{} : it->second;
}

double TrainingCounts::polarity(std::string_view word) const {
  if (n_pos_ == 0 || n_neg_ == 0) {
    throw ValidationError("polarity needs both positive and negative training samples");
  }
  const auto c = counts(word);
  return smoothed_polarity(c.df_pos, c.df_neg, n_pos_, n_neg_);
}

double polarity_score(std::string_view word, std::span<const Sample> train) {
  return TrainingCounts::from_samples(train).polarity(word);
}

double compute_idf(std::string_view word, std::span<const Sample> train) {
  return TrainingCounts::from_samples(train).idf(word);
}

KeywordLexicon::KeywordLexicon(std::vector<Keyword> keywords) : keywords_(std::move(keywords)) {
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (!index_.emplace(keywords_[i].word, i).second) {
      throw ValidationError("duplicate keyword '" + keywords_[i].word + "'");
    }
  }
}

std::optional<std::size_t> KeywordLexicon::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KeywordLexicon build_keyword_lexicon(const EmbeddingTable& table, std::span<const std::string> seeds,
                                     std::span<const Sample> train, std::size_t k) {
  if (k == 0) throw ValidationError("keyword count must be positive");
  const auto counts = TrainingCounts::from_samples(train);
  if (counts.positives() == 0 || counts.negatives() == 0) {
    throw ValidationError("keyword lexicon needs both positive and negative training samples");
  }

  std::vector<Keyword> keywords;
  for (auto& scored : rank_by_seed_similarity(table, seeds)) {
    if (keywords.size() == k) break;
    const auto c = counts.counts(scored.word);
    if (c.df == 0) continue;
    keywords.push_back({std::move(scored.word), scored.seed, scored.score, c.df,
                        smoothed_idf(counts.samples(), c.df),
                        smoothed_polarity(c.df_pos, c.df_neg, counts.positives(),
                                          counts.negatives())});
  }

  KeywordLexicon lexicon(std::move(keywords));
  if (lexicon.size() < k) {
    lexicon.warnings.push_back("only " + std::to_string(lexicon.size()) +
                               " candidate keywords available, requested " + std::to_string(k));
    spdlog::warn("{}", lexicon.warnings.back());
  }
  return lexicon;
}

void write_keyword_lexicon(const std::filesystem::path& path, const KeywordLexicon& lexicon) {
  auto out = open_output(path);
  out << "word,seed_flag,similarity,df,idf,ps\n";
  for (const auto& k : lexicon.keywords()) {
    out << k.word << ',' << (k.seed ? 1 : 0) << ',' << format_double(k.similarity) << ',' << k.df
        << ',' << format_double(k.idf) << ',' << format_double(k.ps) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

KeywordLexicon load_keyword_lexicon(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Keyword> keywords;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (line_no == 1) {
      if (text != "word,seed_flag,similarity,df,idf,ps") {
        throw ParseError("expected header 'word,seed_flag,similarity,df,idf,ps'", 1);
      }
      continue;
    }
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 6) throw ParseError("expected 6 fields", line_no);
    try {
      keywords.push_back({std::string(f[0]), parse_flag(f[1], line_no), parse_double(f[2]),
                          parse_size(f[3]), parse_double(f[4]), parse_double(f[5])});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return KeywordLexicon(std::move(keywords));
}

CategorySeeds default_category_seeds() {
  return {
      {"new-product", {"released", "publish", "presented", "unveil"}},
      {"acquisition", {"acquire", "acquisition", "merger", "takeover"}},
      {"price-rise", {"rise", "surge", "rally", "climb"}},
      {"price-drop", {"drop", "fall", "plunge", "tumble"}},
      {"law-suit", {"lawsuit", "sue", "litigation", "court"}},
      {"fiscal-report", {"earnings", "revenue", "quarterly", "profit"}},
      {"investment", {"invest", "investment", "stake", "funding"}},
      {"bankrupt", {"bankruptcy", "bankrupt", "insolvency", "default"}},
      {"government", {"government", "regulators", "federal", "congress"}},
      {"analyst-highlights", {"analyst", "upgrade", "downgrade", "rating"}},
  };
}

CategorySeeds load_category_seeds(const std::filesystem::path& path) {
  auto in = open_input(path);
  CategorySeeds seeds;
  std::unordered_set<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) throw ParseError("malformed section header", line_no);
      std::string name(trim(text.substr(1, text.size() - 2)));
      if (!names.insert(name).second) throw ParseError("duplicate category '" + name + "'", line_no);
      seeds.emplace_back(std::move(name), std::vector<std::string>{});
      continue;
    }
    if (seeds.empty()) throw ParseError("seed word before any [category] header", line_no);
    seeds.back().second.push_back(to_lower(text));
  }
  for (const auto& [name, words] : seeds) {
    if (words.empty()) throw ParseError("category '" + name + "' has no seed words");
  }
  return seeds;
}

CategoryLexicon::CategoryLexicon(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    for (const auto& w : categories_[c].words) membership_[w.word].push_back(c);
  }
}

const std::vector<std::size_t>& CategoryLexicon::categories_of(std::string_view word) const {
  static const std::vector<std::size_t> none;
  const auto it = membership_.find(std::string(word));
  return it == membership_.end() ? none : it->second;
}

CategoryLexicon build_category_lexicon(const EmbeddingTable& table, const CategorySeeds& seeds,
                                       std::size_t m) {
  if (m == 0) throw ValidationError("category size must be positive");
  std::vector<Category> categories;
  std::vector<std::string> warnings;
  for (const auto& [name, words] : seeds) {
    std::vector<ScoredWord> ranked;
    try {
      ranked = rank_by_seed_similarity(table, words);
    } catch (const ValidationError&) {
      throw ValidationError("category '" + name + "': no seed word is in the embedding vocabulary");
    }
    if (ranked.size() > m) ranked.resize(m);
    if (ranked.size() < m) {
      warnings.push_back("category '" + name + "' has only " + std::to_string(ranked.size()) +
                         " words, requested " + std::to_string(m));
      spdlog::warn("{}", warnings.back());
    }
    categories.push_back({name, std::move(ranked)});
  }
  CategoryLexicon lexicon(std::move(categories));
  lexicon.warnings = std::move(warnings);
  return lexicon;
}

void write_category_lexicon(const std::filesystem::path& path, const CategoryLexicon& lexicon) {
  auto out = open_output(path);
  out << "category,word,seed_flag,similarity\n";
  for (const auto& c : lexicon.categories()) {
    for (const auto& w : c.words) {
      out << c.name << ',' << w.word << ',' << (w.seed ? 1 : 0) << ',' << format_double(w.score)
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

CategoryLexicon load_category_lexicon(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Category> categories;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (line_no == 1) {
      if (text != "category,word,seed_flag,similarity") {
        throw ParseError("expected header 'category,word,seed_flag,similarity'", 1);
      }
      continue;
    }
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 4) throw ParseError("expected 4 fields", line_no);
    if (categories.empty() || categories.back().name != f[0]) {
      for (const auto& c : categories) {
        if (c.name == f[0]) throw ParseError("category rows must be contiguous", line_no);
      }
      categories.push_back({std::string(f[0]), {}});
    }
    try {
      categories.back().words.push_back(
          {std::string(f[1]), parse_double(f[3]), parse_flag(f[2], line_no)});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return CategoryLexicon(std::move(categories));
}

}  // namespace newsmotion
