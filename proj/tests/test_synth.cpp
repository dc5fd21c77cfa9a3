#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"
#include "newsmotion/corr_graph.hpp"
#include "newsmotion/errors.hpp"
#include "newsmotion/sampling.hpp"
#include "newsmotion/synth.hpp"
#include "newsmotion/text.hpp"

using namespace newsmotion;
using testutil::TempDir;

namespace {

SyntheticConfig small() {
  SyntheticConfig c;
  c.tickers = 10;
  c.start = Date::from_ymd(2011, 1, 1);
  c.end = Date::from_ymd(2011, 6, 30);
  c.samples_per_day = 3;
  c.filler_words = 100;
  return c;
}

// Subject-adjusted vote of the planted words: +1 per up word with the ticker as the
// nearest mention on its left, -1 otherwise; reversed for down words.
int planted_vote(const Sentence& s, const std::string& ticker) {
  const std::set<std::string> up(synthetic_up_words().begin(), synthetic_up_words().end());
  const std::set<std::string> down(synthetic_down_words().begin(), synthetic_down_words().end());
  int vote = 0;
  for (const auto& tok : tokenize_with_offsets(s.text)) {
    const int polarity = up.count(tok.text) ? 1 : down.count(tok.text) ? -1 : 0;
    if (polarity == 0) continue;
    const Mention* nearest = nullptr;
    for (const auto& m : s.mentions)
      if (m.offset < tok.offset && (!nearest || m.offset > nearest->offset)) nearest = &m;
    const bool subject = nearest && nearest->ticker == ticker;
    vote += subject ? polarity : -polarity;
  }
  return vote;
}

}  // namespace

TEST(Synth, SameSeedSameFiles) {
  TempDir dir;
  generate_synthetic_fixture(small(), dir / "a1.jsonl", dir / "p1.csv", dir / "x1.csv");
  generate_synthetic_fixture(small(), dir / "a2.jsonl", dir / "p2.csv", dir / "x2.csv");
  EXPECT_EQ(testutil::read_file(dir / "a1.jsonl"), testutil::read_file(dir / "a2.jsonl"));
  EXPECT_EQ(testutil::read_file(dir / "p1.csv"), testutil::read_file(dir / "p2.csv"));
  EXPECT_EQ(testutil::read_file(dir / "x1.csv"), testutil::read_file(dir / "x2.csv"));
  auto other = small();
  other.seed = 2;
  generate_synthetic_fixture(other, dir / "a3.jsonl", dir / "p3.csv", dir / "x3.csv");
  EXPECT_NE(testutil::read_file(dir / "a1.jsonl"), testutil::read_file(dir / "a3.jsonl"));
}

TEST(Synth, FilesLoadBack) {
  TempDir dir;
  const auto data = generate_synthetic(small());
  write_synthetic(data, dir / "a.jsonl", dir / "p.csv", dir / "x.csv");
  const auto articles = load_articles(dir / "a.jsonl");
  EXPECT_EQ(articles.size(), data.articles.size());
  const auto prices = load_prices(dir / "p.csv", {small().start, small().end});
  EXPECT_EQ(prices.size(), 10u);
  const auto aliases = AliasTable::load(dir / "x.csv");
  EXPECT_EQ(aliases.tickers().size(), 10u);
}

TEST(Synth, NoiseFreeTextDeterminesTheLabel) {
  auto cfg = small();
  cfg.noise = 0.0;
  const auto data = generate_synthetic(cfg);
  AliasTable aliases;
  for (const auto& [alias, ticker] : data.aliases) aliases.add(alias, ticker);
  const PriceTable prices(data.prices, {cfg.start, cfg.end});
  const auto samples = build_samples(extract_sentences(data.articles, aliases, AbbreviationList::defaults()), prices);
  std::size_t checked = 0;
  for (const auto& s : samples) {
    if (!s.label) continue;
    int vote = 0;
    for (const auto& sentence : s.sentences) vote += planted_vote(sentence, s.ticker);
    ASSERT_NE(vote, 0) << s.ticker << " " << s.date.to_string();
    EXPECT_EQ(vote > 0 ? Label::positive : Label::negative, *s.label) << s.ticker << " " << s.date.to_string();
    ++checked;
  }
  EXPECT_GT(checked, 200u);
}

TEST(Synth, CoupledGroupsGiveStrongEdges) {
  auto cfg = small();
  cfg.coupling = 1.0;
  const auto data = generate_synthetic(cfg);
  const PriceTable prices(data.prices, {cfg.start, cfg.end});
  const auto universe = prices.tickers();
  const auto graph = build_graph(prices, universe, {0.8, 50, {cfg.start, cfg.end}});
  ASSERT_EQ(data.groups.size(), 2u);
  for (const auto& g : data.groups) {
    for (std::size_t i = 1; i < g.members.size(); ++i) {
      const auto w = graph.weight(*graph.index_of(g.members[0]), *graph.index_of(g.members[i]));
      ASSERT_TRUE(w);
      EXPECT_GT(*w * g.signs[i], 0.99);
    }
  }
}

TEST(Synth, InvalidConfigs) {
  auto c = small();
  c.tickers = 1000;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.noise = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.samples_per_day = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.end = c.start;
  EXPECT_THROW(c.validate(), ValidationError);
}
