#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"
#include "newsmotion/errors.hpp"
#include "newsmotion/sampling.hpp"

using namespace newsmotion;
using testutil::TempDir;

namespace {

Date d(const char* s) { return Date::parse(s); }

AliasTable tech_aliases() {
  AliasTable t;
  t.add("Apple", "AAPL");
  t.add("AAPL", "AAPL");
  t.add("Samsung", "SSNLF");
  t.add("Microsoft", "MSFT");
  return t;
}

std::vector<std::string> tickers_of(const std::vector<Mention>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.ticker);
  return out;
}

}  // namespace

TEST(SplitSentences, TwoTerminatedSentences) {
  const auto s = split_sentences("Apple rose. Google fell.", AbbreviationList::defaults());
  EXPECT_EQ(s, (std::vector<std::string>{"Apple rose.", "Google fell."}));
}

TEST(SplitSentences, DecimalPointIsNotABoundary) {
  const auto s = split_sentences("Shares hit $3.50 today.", AbbreviationList::defaults());
  EXPECT_EQ(s, std::vector<std::string>{"Shares hit $3.50 today."});
}

TEST(SplitSentences, EmptyBody) {
  EXPECT_TRUE(split_sentences("", AbbreviationList::defaults()).empty());
  EXPECT_TRUE(split_sentences("   ", AbbreviationList::defaults()).empty());
}

TEST(SplitSentences, AbbreviationsDoNotSplit) {
  const auto s = split_sentences("Apple Inc. rose 3% vs. Microsoft Corp. today. Then it fell!",
                                 AbbreviationList::defaults());
  EXPECT_EQ(s, (std::vector<std::string>{"Apple Inc. rose 3% vs. Microsoft Corp. today.", "Then it fell!"}));
}

TEST(SplitSentences, UnterminatedTailKeptAndQuotesAbsorbed) {
  const auto s = split_sentences("He said \"sell.\" Then nothing", AbbreviationList::defaults());
  EXPECT_EQ(s, (std::vector<std::string>{"He said \"sell.\"", "Then nothing"}));
}

TEST(SplitSentences, AbbreviationFileLoads) {
  TempDir dir;
  testutil::write_file(dir / "abbr.txt", "# comment\nApprox.\n\n");
  const auto list = AbbreviationList::load(dir / "abbr.txt");
  EXPECT_EQ(list.size(), 1u);
  EXPECT_EQ(split_sentences("Approx. ten fell.", list).size(), 1u);
}

TEST(TagMentions, ThreeCompanySentence) {
  const std::string text = "Apple slipped behind Samsung and Microsoft in a 2013 survey";
  const auto ms = tag_mentions(text, tech_aliases());
  EXPECT_EQ(tickers_of(ms), (std::vector<std::string>{"AAPL", "SSNLF", "MSFT"}));
  EXPECT_EQ(ms[0].offset, 0u);
  EXPECT_EQ(ms[1].offset, text.find("Samsung"));
}

TEST(TagMentions, NoAliases) {
  EXPECT_TRUE(tag_mentions("Markets were quiet.", tech_aliases()).empty());
}

TEST(TagMentions, LongestMatchWins) {
  auto t = tech_aliases();
  t.add("Appleseed Fund", "SEED");
  EXPECT_EQ(tickers_of(tag_mentions("Appleseed Fund gained.", t)), std::vector<std::string>{"SEED"});
  t.add("Apple Bank", "ABNK");
  EXPECT_EQ(tickers_of(tag_mentions("Apple Bank and Apple", t)),
            (std::vector<std::string>{"ABNK", "AAPL"}));
}

TEST(TagMentions, WordBoundariesAndCase) {
  const auto t = tech_aliases();
  EXPECT_TRUE(tag_mentions("Pineapple growers", t).empty());
  EXPECT_TRUE(tag_mentions("Applet code", t).empty());
  EXPECT_EQ(tickers_of(tag_mentions("shares of apple rose", t)), std::vector<std::string>{"AAPL"});
  EXPECT_TRUE(tag_mentions("aapl", t).empty());
  EXPECT_EQ(tickers_of(tag_mentions("(AAPL) rose", t)), std::vector<std::string>{"AAPL"});
}

TEST(TagMentions, SymbolIsCaseSensitive) {
  AliasTable t;
  t.add("IT", "GART");
  EXPECT_TRUE(t.tag("it rose").empty());
  EXPECT_EQ(t.tag("IT rose").size(), 1u);
}

TEST(AliasTable, LoadsCsv) {
  TempDir dir;
  testutil::write_file(dir / "aliases.csv", "alias,ticker\nApple,AAPL\nAAPL,AAPL\n");
  const auto t = AliasTable::load(dir / "aliases.csv");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.tickers(), std::vector<std::string>{"AAPL"});
  testutil::write_file(dir / "bad.csv", "name,ticker\nApple,AAPL\n");
  EXPECT_THROW(AliasTable::load(dir / "bad.csv"), Error);
}

TEST(ExtractSentences, KeepsOnlySentencesWithMentions) {
  const std::vector<Article> articles{
      {"1", d("2012-01-03"), "Apple news", "Apple rose. Markets were calm. Microsoft fell.", "w"}};
  const auto s = extract_sentences(articles, tech_aliases(), AbbreviationList::defaults());
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Apple rose.");
  EXPECT_EQ(s[1].mentions[0].ticker, "MSFT");
  EXPECT_EQ(s[0].article_date, d("2012-01-03"));
}

TEST(MovementLabel, NextTradingDateNotCalendarDay) {
  // Friday 10, Monday 11: Saturday news attaches to the Friday->Monday move.
  PriceSeries s("AAPL", {{d("2012-01-06"), 10.0}, {d("2012-01-09"), 11.0}, {d("2012-01-10"), 11.0}});
  EXPECT_EQ(movement_label(s, d("2012-01-06")), Label::positive);
  EXPECT_EQ(movement_label(s, d("2012-01-07")), Label::positive);
  EXPECT_FALSE(movement_label(s, d("2012-01-09")).has_value());  // tie
  EXPECT_FALSE(movement_label(s, d("2012-01-10")).has_value());  // no next close
  EXPECT_FALSE(movement_label(s, d("2012-01-05")).has_value());  // no prior close
}

class BuildSamples : public ::testing::Test {
 protected:
  PriceTable prices{{PriceSeries("AAPL", {{d("2012-01-03"), 10.0}, {d("2012-01-04"), 11.0}}),
                     PriceSeries("MSFT", {{d("2012-01-03"), 20.0}, {d("2012-01-04"), 19.0}})},
                    {d("2012-01-01"), d("2012-12-31")}};
  AliasTable aliases = tech_aliases();
};

TEST_F(BuildSamples, GroupsSentencesPerDateAndTicker) {
  const std::vector<Sentence> sentences{testutil::sentence("Apple rose.", d("2012-01-03"), aliases),
                                        testutil::sentence("Apple again.", d("2012-01-03"), aliases)};
  const auto samples = build_samples(sentences, prices);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_EQ(samples[0].ticker, "AAPL");
  EXPECT_EQ(samples[0].sentences.size(), 2u);
  EXPECT_EQ(samples[0].label, Label::positive);
}

TEST_F(BuildSamples, SentenceWithTwoTickersLabeledTwice) {
  const std::vector<Sentence> sentences{
      testutil::sentence("Apple rose while Microsoft fell.", d("2012-01-03"), aliases)};
  const auto samples = build_samples(sentences, prices);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].ticker, "AAPL");
  EXPECT_EQ(samples[0].label, Label::positive);
  EXPECT_EQ(samples[1].ticker, "MSFT");
  EXPECT_EQ(samples[1].label, Label::negative);
  EXPECT_EQ(samples[0].sentences, samples[1].sentences);
}

TEST_F(BuildSamples, MultiplicityMatchesDistinctMentions) {
  const std::vector<Sentence> sentences{
      testutil::sentence("Apple and AAPL and Microsoft.", d("2012-01-03"), aliases),
      testutil::sentence("Samsung only.", d("2012-01-03"), aliases),
      testutil::sentence("Apple alone.", d("2012-01-04"), aliases)};
  const auto samples = build_samples(sentences, prices);
  std::size_t total = 0;
  for (const auto& s : samples) total += s.sentences.size();
  std::size_t expected = 0;
  for (const auto& s : sentences) {
    std::set<std::string> distinct;
    for (const auto& m : s.mentions) distinct.insert(m.ticker);
    expected += distinct.size();
  }
  EXPECT_EQ(total, expected);
  // Samsung has no prices and AAPL on 01-04 has no next close: both unlabeled.
  std::size_t unlabeled = 0;
  for (const auto& s : samples) unlabeled += !s.label.has_value();
  EXPECT_EQ(unlabeled, 2u);
}

TEST(SplitByDate, OneSamplePerSplit) {
  std::vector<Sample> samples;
  for (const char* date : {"2012-12-31", "2013-03-01", "2013-07-01"}) {
    samples.push_back(testutil::sample("AAPL", d(date), {}, Label::positive));
  }
  samples.push_back(testutil::sample("AAPL", d("2013-01-02"), {}, std::nullopt));
  const auto split = split_by_date(samples, d("2012-12-31"), d("2013-06-30"));
  ASSERT_EQ(split.train.size(), 1u);
  ASSERT_EQ(split.validation.size(), 1u);
  ASSERT_EQ(split.test.size(), 1u);
  EXPECT_EQ(split.train[0].date, d("2012-12-31"));
  EXPECT_EQ(split.test[0].date, d("2013-07-01"));
}

TEST(SplitByDate, BoundariesInclusive) {
  std::vector<Sample> samples{testutil::sample("A", d("2013-06-30"), {}, Label::negative),
                              testutil::sample("A", d("2011-01-01"), {}, Label::negative)};
  const auto split = split_by_date(samples, d("2012-12-31"), d("2013-06-30"));
  EXPECT_EQ(split.train.size(), 1u);
  EXPECT_EQ(split.validation.size(), 1u);
  EXPECT_TRUE(split.test.empty());
}

TEST(SplitByDate, RequiresOrderedBoundaries) {
  EXPECT_THROW(split_by_date({}, d("2013-01-01"), d("2013-01-01")), ValidationError);
}

TEST(SplitByDate, PartitionsLabeledSamples) {
  std::vector<Sample> samples;
  for (int i = 0; i < 400; ++i) {
    samples.push_back(testutil::sample("T" + std::to_string(i % 7), d("2012-06-01").plus_days(i),
                                       {}, i % 3 ? std::optional(Label::positive) : std::nullopt));
  }
  const auto split = split_by_date(samples, d("2012-12-31"), d("2013-03-31"));
  std::size_t labeled = 0;
  for (const auto& s : samples) labeled += s.label.has_value();
  EXPECT_EQ(split.train.size() + split.validation.size() + split.test.size(), labeled);
  for (const auto& s : split.train) EXPECT_LE(s.date, d("2012-12-31"));
  for (const auto& s : split.validation) {
    EXPECT_GT(s.date, d("2012-12-31"));
    EXPECT_LE(s.date, d("2013-03-31"));
  }
  for (const auto& s : split.test) EXPECT_GT(s.date, d("2013-03-31"));
}

TEST(Samples, PersistRoundTrip) {
  TempDir dir;
  const auto aliases = tech_aliases();
  const std::vector<Sample> samples{
      testutil::sample("AAPL", d("2012-01-03"),
                       {testutil::sentence("Apple \"rose\" past Microsoft.", d("2012-01-03"), aliases)},
                       Label::positive),
      testutil::sample("MSFT", d("2012-01-04"), {}, std::nullopt)};
  write_samples(dir / "s.jsonl", samples);
  EXPECT_EQ(load_samples(dir / "s.jsonl"), samples);
}

TEST(Labels, ParseAndInvert) {
  EXPECT_EQ(parse_label(to_string(Label::positive)), Label::positive);
  EXPECT_EQ(invert(Label::negative), Label::positive);
  EXPECT_THROW(parse_label("sideways"), Error);
}

TEST(Abbreviations, ShippedFileMatchesDefaults) {
  const auto shipped = AbbreviationList::load(std::filesystem::path(NEWSMOTION_SOURCE_DIR) / "data" / "abbreviations.txt");
  const std::string body = "Acme Inc. rose. Mr. Smith said U.S. demand fell vs. last year. Done.";
  EXPECT_EQ(split_sentences(body, shipped), split_sentences(body, AbbreviationList::defaults()));
  EXPECT_EQ(split_sentences(body, shipped).size(), 3u);
}
