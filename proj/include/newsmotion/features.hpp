#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "newsmotion/data_ingest.hpp"
#include "newsmotion/lexicon.hpp"
#include "newsmotion/sampling.hpp"

namespace newsmotion {

inline constexpr std::size_t kPriceWindow = 5;
inline constexpr std::size_t kPriceFeatureSize = 12;

// Normalized closes of the five trading dates before the target date (oldest
// first) with their first and second differences.
struct PriceFeature {
  std::array<double, 5> level{};
  std::array<double, 4> delta{};
  std::array<double, 3> delta2{};

  std::array<double, kPriceFeatureSize> flatten() const;
};

// Why a sample produced no feature vector.
struct Skip {
  std::string reason;
};

std::variant<PriceFeature, Skip> price_features(const PriceSeries& series, const NormStats& stats,
                                                Date target);

enum class Verdict { subject, not_subject };

// Decides whether the target ticker is the grammatical subject of a keyword
// occurrence. Implementations must be thread-safe.
class SubjectDetector {
 public:
  virtual ~SubjectDetector() = default;
  virtual Verdict judge(const Sentence& sentence, std::string_view target,
                        std::size_t keyword_offset) const = 0;
};

// Subject iff the closest mention to the left of the keyword belongs to the
// target. Targets that appear only to the right of the keyword are not subjects.
class NearestLeftMentionDetector final : public SubjectDetector {
 public:
  Verdict judge(const Sentence& sentence, std::string_view target,
                std::size_t keyword_offset) const override;
};

inline Verdict subject_of_keyword(const Sentence& sentence, std::string_view target,
                                  std::size_t keyword_offset) {
  return NearestLeftMentionDetector{}.judge(sentence, target, keyword_offset);
}

// tf(w) * idf(w), tf = token count of w across the sample's sentences.
std::vector<double> bok_features(const Sample& sample, const KeywordLexicon& lexicon);
// idf(w) * PS(w) * sum over occurrences of (+1 subject, -1 otherwise).
std::vector<double> ps_features(const Sample& sample, const KeywordLexicon& lexicon,
                                const SubjectDetector& detector);
inline std::vector<double> ps_features(const Sample& sample, const KeywordLexicon& lexicon) {
  return ps_features(sample, lexicon, NearestLeftMentionDetector{});
}
// log(1 + N_c), N_c = occurrences of category-c words in the sample.
std::vector<double> ct_features(const Sample& sample, const CategoryLexicon& categories);

struct BlockSet {
  bool price = false;
  bool bok = false;
  bool ps = false;
  bool ct = false;

  static BlockSet all() { return {true, true, true, true}; }
  // "price+BoK+PS+CT" style; case-insensitive block names joined by '+'.
  static BlockSet parse(std::string_view text);
  std::string name() const;
  bool any() const { return price || bok || ps || ct; }

  friend bool operator==(const BlockSet&, const BlockSet&) = default;
};

// Which blocks a feature vector carries, in the fixed order price, BoK, PS, CT.
// Sizes of inactive blocks are zero so equal layouts compare equal.
class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(BlockSet blocks, std::size_t keywords, std::size_t categories);

  const BlockSet& blocks() const noexcept { return blocks_; }
  std::size_t keywords() const noexcept { return keywords_; }
  std::size_t categories() const noexcept { return categories_; }
  std::size_t dimension() const noexcept { return dimension_; }

  std::size_t price_offset() const noexcept { return 0; }
  std::size_t bok_offset() const noexcept { return blocks_.price ? kPriceFeatureSize : 0; }
  std::size_t ps_offset() const noexcept { return bok_offset() + (blocks_.bok ? keywords_ : 0); }
  std::size_t ct_offset() const noexcept { return ps_offset() + (blocks_.ps ? keywords_ : 0); }

  // Sub-layout; throws when `blocks` is not contained in this layout.
  FeatureLayout select(BlockSet blocks) const;
  // Column indices of `sub` inside this layout.
  std::vector<std::size_t> columns_of(const FeatureLayout& sub) const;

  // "price=12;bok=1000;ps=1000;ct=10" listing active blocks only.
  std::string to_string() const;
  static FeatureLayout parse(std::string_view text);

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;

 private:
  BlockSet blocks_;
  std::size_t keywords_ = 0;
  std::size_t categories_ = 0;
  std::size_t dimension_ = 0;
};

struct FeatureParts {
  std::optional<std::array<double, kPriceFeatureSize>> price;
  std::optional<std::vector<double>> bok;
  std::optional<std::vector<double>> ps;
  std::optional<std::vector<double>> ct;
};

struct FeatureVector {
  FeatureLayout layout;
  std::vector<double> values;
};

// Throws ValidationError when an enabled block is missing from `parts`.
FeatureVector assemble(BlockSet blocks, const FeatureParts& parts);

struct FeatureRow {
  Label label = Label::negative;
  std::string ticker;
  Date date;
  std::vector<double> values;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
  FeatureLayout layout;
  std::vector<FeatureRow> rows;

  FeatureMatrix select(BlockSet blocks) const;
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct SkippedSample {
  std::string ticker;
  Date date;
  std::string reason;
};

struct FeaturizeResult {
  FeatureMatrix matrix;
  std::vector<SkippedSample> skipped;
};

// Turns labeled samples into feature rows. The price target is the first trading
// date after the sample date, i.e. the close the label is read from.
class Featurizer {
 public:
  Featurizer(const PriceTable& prices, const KeywordLexicon* keywords,
             const CategoryLexicon* categories, const SubjectDetector& detector, BlockSet blocks);

  const FeatureLayout& layout() const noexcept { return layout_; }
  std::variant<FeatureVector, Skip> featurize(const Sample& sample) const;
  FeaturizeResult run(std::span<const Sample> samples) const;

 private:
  const PriceTable& prices_;
  const KeywordLexicon* keywords_;
  const CategoryLexicon* categories_;
  const SubjectDetector& detector_;
  BlockSet blocks_;
  FeatureLayout layout_;
};

// CSV; first line "# layout <descriptor>", then header "label,ticker,date,f0,...".
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace newsmotion
