#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "newsmotion/errors.hpp"
#include "newsmotion/lexicon.hpp"

using namespace newsmotion;
using testutil::TempDir;

namespace {

Date day(int i) { return Date::parse("2012-01-02").plus_days(i); }

Sample text_sample(const std::string& text, Label label, int i = 0) {
  return testutil::sample("T", day(i), {Sentence{text, day(i), {}}}, label);
}

// Brute-force document counts: words are separated by single spaces.
struct Oracle {
  std::size_t df_pos = 0, df_neg = 0, n_pos = 0, n_neg = 0, n = 0;

  Oracle(const std::vector<Sample>& samples, const std::string& word) {
    for (const auto& s : samples) {
      bool found = false;
      for (const auto& sentence : s.sentences) {
        std::istringstream in(sentence.text);
        std::string w;
        while (in >> w) found = found || w == word;
      }
      const bool pos = *s.label == Label::positive;
      ++n;
      (pos ? n_pos : n_neg) += 1;
      if (found) (pos ? df_pos : df_neg) += 1;
    }
  }

  double ps() const {
    return std::log((double(df_pos) + 1) * (double(n_neg) + 1) /
                    ((double(df_neg) + 1) * (double(n_pos) + 1)));
  }
  double idf() const { return std::log((double(n) + 1) / (double(df_pos + df_neg) + 1)); }
};

std::vector<Sample> random_corpus(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
  const std::size_t n = 2 + rng() % 29;
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t len = 1 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k) text += (k ? " " : "") + vocab[rng() % vocab.size()];
    const Label label = i == 0 ? Label::positive : i == 1 ? Label::negative
                                                          : (rng() % 2 ? Label::positive : Label::negative);
    samples.push_back(text_sample(text, label, static_cast<int>(i)));
  }
  return samples;
}

std::vector<Sample> invert_labels(std::vector<Sample> samples) {
  for (auto& s : samples) s.label = invert(*s.label);
  return samples;
}

// Seeds on axes 0..8, a planted neighbor close to axis 0, the rest on far axes.
EmbeddingTable planted_table() {
  std::vector<std::string> words = default_keyword_seeds();
  words.push_back("rebound");
  for (int i = 0; i < 10; ++i) words.push_back("other" + std::to_string(i));
  const std::size_t dim = 20;
  std::vector<double> values(words.size() * dim, 0.0);
  for (std::size_t i = 0; i < 9; ++i) values[i * dim + i] = 1.0;
  values[9 * dim + 0] = 1.0;
  values[9 * dim + 19] = 0.1;
  for (std::size_t i = 10; i < words.size(); ++i) values[i * dim + i - 1] = 1.0;
  std::vector<std::uint64_t> counts(words.size(), 1);
  return EmbeddingTable(words, counts, dim, values);
}

std::vector<Sample> samples_with_every_word(const EmbeddingTable& t) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.push_back(text_sample(t.word(i), i % 2 ? Label::positive : Label::negative, int(i)));
  }
  return out;
}

}  // namespace

TEST(Polarity, FourSampleFixture) {
  const std::vector<Sample> train{text_sample("stocks surge", Label::positive),
                                  text_sample("surge again", Label::positive),
                                  text_sample("stocks drop", Label::negative),
                                  text_sample("quiet day", Label::negative)};
  EXPECT_NEAR(polarity_score("surge", train), std::log(3.0), 1e-12);
  EXPECT_NEAR(polarity_score("stocks", train), 0.0, 1e-12);
  EXPECT_NEAR(polarity_score("absent", train), 0.0, 1e-12);
  EXPECT_NEAR(polarity_score("drop", train), -std::log(2.0), 1e-12);
}

TEST(Polarity, RepeatsInsideASampleCountOnce) {
  const std::vector<Sample> train{text_sample("surge surge surge", Label::positive),
                                  text_sample("calm", Label::negative)};
  EXPECT_NEAR(polarity_score("surge", train), std::log(2.0 * 2.0 / (1.0 * 2.0)), 1e-12);
}

TEST(Polarity, SingleClassIsAnError) {
  const std::vector<Sample> train{text_sample("surge", Label::positive)};
  EXPECT_THROW(polarity_score("surge", train), ValidationError);
}

TEST(Polarity, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  for (int trial = 0; trial < 50; ++trial) {
    const auto samples = random_corpus(rng, vocab);
    const auto counts = TrainingCounts::from_samples(samples);
    const auto inverted = TrainingCounts::from_samples(invert_labels(samples));
    for (const auto& w : vocab) {
      const Oracle o(samples, w);
      EXPECT_NEAR(counts.polarity(w), o.ps(), 1e-12);
      EXPECT_NEAR(counts.idf(w), o.idf(), 1e-12);
      EXPECT_EQ(inverted.polarity(w), -counts.polarity(w));
      // exp(PS) times the smoothed class odds gives back the smoothed df ratio.
      const double ratio = std::exp(counts.polarity(w)) * (double(o.n_pos) + 1) / (double(o.n_neg) + 1);
      EXPECT_NEAR(ratio, (double(o.df_pos) + 1) / (double(o.df_neg) + 1), 1e-12 * std::max(1.0, ratio));
    }
  }
}

TEST(Idf, DirectValues) {
  const std::vector<Sample> three{text_sample("surge now", Label::positive),
                                  text_sample("now", Label::negative),
                                  text_sample("now", Label::positive)};
  EXPECT_NEAR(compute_idf("surge", three), std::log(2.0), 1e-15);
  EXPECT_NEAR(compute_idf("now", three), 0.0, 1e-15);
  EXPECT_NEAR(compute_idf("absent", three), std::log(4.0), 1e-15);
}

TEST(KeywordLexicon, ShortfallKeepsAllAndWarns) {
  std::vector<std::string> words = default_keyword_seeds();
  for (const char* w : {"rebound", "tumble", "decline"}) words.push_back(w);
  std::vector<double> values;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t i = 0; i < words.size() * 4; ++i) values.push_back(n(rng));
  const EmbeddingTable t(words, std::vector<std::uint64_t>(words.size(), 1), 4, values);
  const auto lex = build_keyword_lexicon(t, default_keyword_seeds(), samples_with_every_word(t), 1000);
  EXPECT_EQ(lex.size(), 12u);
  ASSERT_EQ(lex.warnings.size(), 1u);
  for (const auto& s : default_keyword_seeds()) {
    ASSERT_TRUE(lex.find(s).has_value());
    EXPECT_TRUE(lex[*lex.find(s)].seed);
  }
}

TEST(KeywordLexicon, PlantedNeighborIsTheOnlyNonSeed) {
  const auto t = planted_table();
  const auto train = samples_with_every_word(t);
  const auto lex = build_keyword_lexicon(t, default_keyword_seeds(), train, 10);
  ASSERT_EQ(lex.size(), 10u);
  EXPECT_TRUE(lex.warnings.empty());
  std::set<std::string> members;
  for (const auto& k : lex.keywords()) members.insert(k.word);
  std::set<std::string> expected(default_keyword_seeds().begin(), default_keyword_seeds().end());
  expected.insert("rebound");
  EXPECT_EQ(members, expected);
  EXPECT_EQ(lex[9].word, "rebound");
  EXPECT_NEAR(lex[9].similarity, 1.0 / std::sqrt(1.01), 1e-12);
  // Stored statistics agree with the brute-force oracle.
  for (const auto& k : lex.keywords()) {
    const Oracle o(train, k.word);
    EXPECT_NEAR(k.ps, o.ps(), 1e-12);
    EXPECT_NEAR(k.idf, o.idf(), 1e-12);
    EXPECT_EQ(k.df, o.df_pos + o.df_neg);
  }
}

TEST(KeywordLexicon, WordsAbsentFromTrainingAreSkipped) {
  const auto t = planted_table();
  auto train = samples_with_every_word(t);
  train.erase(train.begin() + 9);  // drop the sample holding "rebound"
  const auto lex = build_keyword_lexicon(t, default_keyword_seeds(), train, 10);
  EXPECT_FALSE(lex.find("rebound").has_value());
  EXPECT_EQ(lex.size(), 10u);
}

TEST(KeywordLexicon, DeterministicAndRoundTrips) {
  TempDir dir;
  const auto t = planted_table();
  const auto train = samples_with_every_word(t);
  const auto a = build_keyword_lexicon(t, default_keyword_seeds(), train, 15);
  const auto b = build_keyword_lexicon(t, default_keyword_seeds(), train, 15);
  EXPECT_EQ(a, b);
  write_keyword_lexicon(dir / "lexicon.csv", a);
  EXPECT_EQ(load_keyword_lexicon(dir / "lexicon.csv"), a);
}

namespace {

EmbeddingTable category_table() {
  // new-product seeds on axes 0..3, "launch" next to "unveil", "buyout" next to
  // "acquire", unrelated filler elsewhere.
  const std::vector<std::string> words{"released", "publish", "presented", "unveil", "launch",
                                       "acquire",  "buyout",  "chair",     "window"};
  const std::size_t dim = 9;
  std::vector<double> v(words.size() * dim, 0.0);
  auto set = [&](std::size_t w, std::size_t axis, double x) { v[w * dim + axis] = x; };
  for (std::size_t i = 0; i < 4; ++i) set(i, i, 1.0);
  set(4, 3, 1.0);
  set(4, 8, 0.2);
  set(5, 4, 1.0);
  set(6, 4, 1.0);
  set(6, 7, 0.3);
  set(7, 5, 1.0);
  set(8, 6, 1.0);
  return EmbeddingTable(words, std::vector<std::uint64_t>(words.size(), 1), dim, v);
}

}  // namespace

TEST(CategoryLexicon, SeedsAreMembers) {
  const CategorySeeds seeds{{"new-product", {"released", "publish", "presented", "unveil"}}};
  const auto lex = build_category_lexicon(category_table(), seeds, 4);
  ASSERT_EQ(lex.size(), 1u);
  std::set<std::string> words;
  for (const auto& w : lex[0].words) words.insert(w.word);
  EXPECT_EQ(words, (std::set<std::string>{"released", "publish", "presented", "unveil"}));
}

TEST(CategoryLexicon, PlantedLaunchIsFirstNonSeed) {
  const CategorySeeds seeds{{"new-product", {"released", "publish", "presented", "unveil"}}};
  const auto lex = build_category_lexicon(category_table(), seeds, 6);
  ASSERT_GE(lex[0].words.size(), 5u);
  EXPECT_EQ(lex[0].words[4].word, "launch");
  EXPECT_FALSE(lex[0].words[4].seed);
}

TEST(CategoryLexicon, OrthogonalSeedSetsExpandDisjointly) {
  const CategorySeeds seeds{{"new-product", {"unveil"}}, {"acquisition", {"acquire"}}};
  const auto lex = build_category_lexicon(category_table(), seeds, 2);
  ASSERT_EQ(lex[0].words.size(), 2u);
  ASSERT_EQ(lex[1].words.size(), 2u);
  EXPECT_EQ(lex[0].words[1].word, "launch");
  EXPECT_EQ(lex[1].words[1].word, "buyout");
  EXPECT_EQ(lex.categories_of("launch"), std::vector<std::size_t>{0});
  EXPECT_EQ(lex.categories_of("buyout"), std::vector<std::size_t>{1});
}

TEST(CategoryLexicon, AllSeedsMissingNamesTheCategory) {
  const CategorySeeds seeds{{"bankrupt", {"bankruptcy", "insolvency"}}};
  try {
    build_category_lexicon(category_table(), seeds, 5);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bankrupt"), std::string::npos);
  }
}

TEST(CategoryLexicon, ShortfallWarns) {
  const CategorySeeds seeds{{"new-product", {"released"}}};
  const auto lex = build_category_lexicon(category_table(), seeds, 100);
  EXPECT_EQ(lex[0].words.size(), 9u);
  EXPECT_EQ(lex.warnings.size(), 1u);
}

TEST(CategoryLexicon, RoundTripAndSeedFile) {
  TempDir dir;
  testutil::write_file(dir / "seeds.txt",
                       "# categories\n[new-product]\nreleased\nUnveil\n\n[acquisition]\nacquire\n");
  const auto seeds = load_category_seeds(dir / "seeds.txt");
  ASSERT_EQ(seeds.size(), 2u);
  EXPECT_EQ(seeds[0].second, (std::vector<std::string>{"released", "unveil"}));
  const auto lex = build_category_lexicon(category_table(), seeds, 3);
  write_category_lexicon(dir / "categories.csv", lex);
  EXPECT_EQ(load_category_lexicon(dir / "categories.csv"), lex);
}

TEST(CategorySeeds, MalformedFiles) {
  TempDir dir;
  testutil::write_file(dir / "a.txt", "released\n");
  EXPECT_THROW(load_category_seeds(dir / "a.txt"), ParseError);
  testutil::write_file(dir / "b.txt", "[x]\n[y]\nword\n");
  EXPECT_THROW(load_category_seeds(dir / "b.txt"), ParseError);
}

TEST(CategorySeeds, DefaultsHaveTenCategories) {
  const auto seeds = default_category_seeds();
  ASSERT_EQ(seeds.size(), 10u);
  EXPECT_EQ(seeds[0].first, "new-product");
  EXPECT_EQ(seeds[0].second, (std::vector<std::string>{"released", "publish", "presented", "unveil"}));
}

TEST(CategorySeedsFile, ShippedFileMatchesDefaults) {
  EXPECT_EQ(load_category_seeds(std::filesystem::path(NEWSMOTION_SOURCE_DIR) / "data" / "category_seeds.txt"),
            default_category_seeds());
}
