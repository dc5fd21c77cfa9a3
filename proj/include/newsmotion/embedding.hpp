#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsmotion {

struct SkipGramConfig {
  std::size_t dimension = 100;
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly towards zero over training
  std::size_t min_count = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

// Dense word vectors, one row per vocabulary word.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                 std::size_t dimension, std::vector<double> values);

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::span<const double> vector(std::size_t i) const {
    return {values_.data() + i * dimension_, dimension_};
  }
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_ && a.dimension_ == b.dimension_ &&
           a.values_ == b.values_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::size_t dimension_ = 0;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SkipGramResult {
  EmbeddingTable table;
  std::vector<double> epoch_losses;  // mean negative-sampling loss per (center, context) pair
};

// Skip-gram with negative sampling. Single-threaded and deterministic in
// (sentences, config): updates follow corpus order, negatives come from the
// unigram^0.75 distribution drawn from a seeded stream.
SkipGramResult train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                              const SkipGramConfig& config);

// Text vector format: "<vocab_size> <dimension>" then "word v1 ... vd" per line.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

// Throws on dimension mismatch or a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

struct ScoredWord {
  std::string word;
  double score = 0.0;
  bool seed = false;

  friend bool operator==(const ScoredWord&, const ScoredWord&) = default;
};

// Every vocabulary word scored by its maximum cosine to any seed; seeds score
// exactly 1. Sorted by descending score, ties by ascending word.
// Out-of-vocabulary seeds are skipped with a warning; all of them missing throws.
std::vector<ScoredWord> rank_by_seed_similarity(const EmbeddingTable& table,
                                                std::span<const std::string> seeds);

}  // namespace newsmotion
