#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsmotion/embedding.hpp"
#include "newsmotion/sampling.hpp"

namespace newsmotion {

// surge, rise, shrink, jump, drop, fall, plunge, gain, slump
const std::vector<std::string>& default_keyword_seeds();

// log[(df_pos + 1)(n_neg + 1) / ((df_neg + 1)(n_pos + 1))]: PMI(w, pos) - PMI(w, neg)
// with add-one smoothing on the joint counts. N and freq(w) cancel out.
double smoothed_polarity(std::size_t df_pos, std::size_t df_neg, std::size_t n_pos,
                         std::size_t n_neg);
// log((N + 1) / (df + 1))
double smoothed_idf(std::size_t n_samples, std::size_t df);

// Sample-level document frequencies over labeled training samples. A sample
// counts once per word no matter how often the word repeats inside it.
class TrainingCounts {
 public:
  struct WordCounts {
    std::size_t df = 0;
    std::size_t df_pos = 0;
    std::size_t df_neg = 0;
  };

  static TrainingCounts from_samples(std::span<const Sample> samples);

  std::size_t samples() const noexcept { return n_pos_ + n_neg_; }
  std::size_t positives() const noexcept { return n_pos_; }
  std::size_t negatives() const noexcept { return n_neg_; }
  WordCounts counts(std::string_view word) const;
  bool occurs(std::string_view word) const { return counts(word).df > 0; }

  double idf(std::string_view word) const { return smoothed_idf(samples(), counts(word).df); }
  // Throws ValidationError unless both classes are present.
  double polarity(std::string_view word) const;

 private:
  std::unordered_map<std::string, WordCounts> words_;
  std::size_t n_pos_ = 0;
  std::size_t n_neg_ = 0;
};

double polarity_score(std::string_view word, std::span<const Sample> train);
double compute_idf(std::string_view word, std::span<const Sample> train);

struct Keyword {
  std::string word;
  bool seed = false;
  double similarity = 0.0;
  std::size_t df = 0;
  double idf = 0.0;
  double ps = 0.0;

  friend bool operator==(const Keyword&, const Keyword&) = default;
};

class KeywordLexicon {
 public:
  KeywordLexicon() = default;
  explicit KeywordLexicon(std::vector<Keyword> keywords);

  std::size_t size() const noexcept { return keywords_.size(); }
  const Keyword& operator[](std::size_t i) const { return keywords_[i]; }
  const std::vector<Keyword>& keywords() const noexcept { return keywords_; }
  std::optional<std::size_t> find(std::string_view word) const;

  // Non-fatal notes from construction, e.g. a candidate shortfall.
  std::vector<std::string> warnings;

  friend bool operator==(const KeywordLexicon& a, const KeywordLexicon& b) {
    return a.keywords_ == b.keywords_;
  }

 private:
  std::vector<Keyword> keywords_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Top `k` words by seed similarity among words that occur in `train`, each
// carrying df, idf and polarity over `train`.
KeywordLexicon build_keyword_lexicon(const EmbeddingTable& table, std::span<const std::string> seeds,
                                     std::span<const Sample> train, std::size_t k);

// CSV `word,seed_flag,similarity,df,idf,ps` in rank order.
void write_keyword_lexicon(const std::filesystem::path& path, const KeywordLexicon& lexicon);
KeywordLexicon load_keyword_lexicon(const std::filesystem::path& path);

using CategorySeeds = std::vector<std::pair<std::string, std::vector<std::string>>>;

// new-product, acquisition, price-rise, price-drop, law-suit, fiscal-report,
// investment, bankrupt, government, analyst-highlights.
CategorySeeds default_category_seeds();
// "[category]" section headers, then one seed word per line; '#' comments.
CategorySeeds load_category_seeds(const std::filesystem::path& path);

struct Category {
  std::string name;
  std::vector<ScoredWord> words;  // seeds included, rank order

  friend bool operator==(const Category&, const Category&) = default;
};

class CategoryLexicon {
 public:
  CategoryLexicon() = default;
  explicit CategoryLexicon(std::vector<Category> categories);

  std::size_t size() const noexcept { return categories_.size(); }
  const Category& operator[](std::size_t i) const { return categories_[i]; }
  const std::vector<Category>& categories() const noexcept { return categories_; }
  // Indices of every category containing `word`.
  const std::vector<std::size_t>& categories_of(std::string_view word) const;

  std::vector<std::string> warnings;

  friend bool operator==(const CategoryLexicon& a, const CategoryLexicon& b) {
    return a.categories_ == b.categories_;
  }

 private:
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::vector<std::size_t>> membership_;
};

CategoryLexicon build_category_lexicon(const EmbeddingTable& table, const CategorySeeds& seeds,
                                       std::size_t m);

// CSV `category,word,seed_flag,similarity`.
void write_category_lexicon(const std::filesystem::path& path, const CategoryLexicon& lexicon);
CategoryLexicon load_category_lexicon(const std::filesystem::path& path);

}  // namespace newsmotion
