#include "newsmotion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "newsmotion/errors.hpp"
#include "newsmotion/random.hpp"
#include "newsmotion/sampling.hpp"

namespace newsmotion {

namespace {

const std::vector<std::string> kNameSyllables = {"bra", "cor", "dex", "fin", "gal", "hel", "jun",
                                                 "kor", "lum", "mar", "nov", "ori", "pax", "quin",
                                                 "ros", "sol", "tal", "ven", "wex", "zan"};
const std::vector<std::string> kFillerSyllables = {"ba", "de", "ki", "lo", "mu", "ne", "pi", "ro",
                                                   "su", "ta", "ve", "zo", "ga", "hu", "ji", "fo"};
const std::vector<std::string> kSuffixes = {"Inc.", "Corp.", "Group", "Systems", "Holdings"};

const std::vector<std::vector<std::string>> kUpCategoryPhrases = {
    {"released a new", "line of", "devices"},
    {"will unveil a", "product called the", "series"},
    {"agreed to acquire", "maker", "for cash"},
    {"announced a merger with a", "firm based in", "county"},
    {"will invest in a", "plant near", "city"},
    {"took a stake in", "startup", "labs"},
    {"received an analyst upgrade to a buy rating from", "research at", "partners"},
    {"reported record profit on", "demand at", "outlets"},
};
const std::vector<std::vector<std::string>> kDownCategoryPhrases = {
    {"faces a lawsuit over", "claims filed by", "customers"},
    {"was ordered to court over", "patents held by", "trust"},
    {"warned of possible bankruptcy after", "losses at", "unit"},
    {"is under insolvency review after", "debts to", "lenders"},
    {"is under scrutiny from federal regulators over", "filings in", "district"},
    {"was the subject of a government probe into", "contracts with", "agency"},
    {"received an analyst downgrade to a sell rating from", "research at", "partners"},
    {"reported weak quarterly earnings and thin revenue on", "sales in", "stores"},
};

struct Company {
  std::string name;
  std::string symbol;
  std::string suffix;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string symbol_of(const std::string& a, const std::string& b) {
  std::string s = a.substr(0, 2) + b.substr(0, 2);
  for (auto& c : s) c = static_cast<char>(c - 'a' + 'A');
  return s;
}

std::vector<Company> company_pool(Rng& rng) {
  std::vector<Company> pool;
  for (const auto& a : kNameSyllables) {
    for (const auto& b : kNameSyllables) {
      if (a == b) continue;
      pool.push_back({capitalize(a + b), symbol_of(a, b), {}});
    }
  }
  shuffle(std::span<Company>(pool), rng);
  for (auto& c : pool) c.suffix = kSuffixes[uniform_index(rng, kSuffixes.size())];
  return pool;
}

std::size_t company_pool_size() { return kNameSyllables.size() * (kNameSyllables.size() - 1); }

std::size_t filler_pool_size() {
  const auto n = kFillerSyllables.size();
  return n * n + n * n * n;
}

std::vector<std::string> filler_vocabulary(std::size_t count, Rng& rng) {
  std::vector<std::string> pool;
  for (const auto& a : kFillerSyllables) {
    for (const auto& b : kFillerSyllables) {
      pool.push_back(a + b);
      for (const auto& c : kFillerSyllables) pool.push_back(a + b + c);
    }
  }
  shuffle(std::span<std::string>(pool), rng);
  pool.resize(count);
  return pool;
}

// Mean-reverting walk: the direction of each step is a fair coin; only the
// step size depends on the current level.
class Factor {
 public:
  Factor(double move_size, double reversion) : move_size_(move_size), reversion_(reversion) {}

  double step(Rng& rng) {
    const double s = bernoulli(rng, 0.5) ? 1.0 : -1.0;
    const double m = move_size_ * (0.5 + uniform01(rng)) * std::exp(-s * reversion_ * level_);
    level_ += s * m;
    return level_;
  }
  double level() const { return level_; }

 private:
  double move_size_;
  double reversion_;
  double level_ = 0.0;
};

class TextWriter {
 public:
  TextWriter(const std::vector<std::string>& filler, Rng& rng) : filler_(filler), rng_(rng) {}

  const std::string& filler() { return filler_[uniform_index(rng_, filler_.size())]; }

  std::string fillers(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += filler();
    }
    return out;
  }

  const std::string& keyword(Label direction) {
    const auto& words =
        direction == Label::positive ? synthetic_up_words() : synthetic_down_words();
    return words[uniform_index(rng_, words.size())];
  }

  std::string percent() {
    const auto tenths = 1 + uniform_index(rng_, 60);
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + " percent";
  }

  std::string full_name(const Company& c) { return c.name + " " + c.suffix; }

  std::string subject_sentence(const Company& c, Label direction) {
    const auto& kw = keyword(direction);
    switch (uniform_index(rng_, 3)) {
      case 0:
        return full_name(c) + " shares " + kw + " " + percent() + " in " + fillers(2) +
               " trading.";
      case 1:
        return "Shares of " + c.name + " " + kw + " after " + fillers(3) + ".";
      default:
        return c.name + " (" + c.symbol + ") " + kw + " on " + fillers(2) + " news.";
    }
  }

  std::string object_sentence(const Company& target, const Company& rival, Label direction) {
    return rival.name + " " + keyword(invert(direction)) + " past " + target.name + " in " +
           fillers(2) + " sales.";
  }

  std::string pair_sentence(const Company& a, Label da, const Company& b, Label db) {
    return a.name + " " + keyword(da) + " while " + b.name + " " + keyword(db) + " on " +
           fillers(2) + ".";
  }

  std::string category_sentence(const Company& c, Label direction) {
    const auto& phrases = direction == Label::positive ? kUpCategoryPhrases : kDownCategoryPhrases;
    const auto& p = phrases[uniform_index(rng_, phrases.size())];
    return c.name + " " + p[0] + " " + filler() + " " + p[1] + " " + filler() + " " + p[2] + ".";
  }

  std::string chatter_sentence(const Company& c) {
    return "Analysts at " + capitalize(filler()) + " said " + c.name + " " + fillers(4) + ".";
  }

 private:
  const std::vector<std::string>& filler_;
  Rng& rng_;
};

}  // namespace

const std::vector<std::string>& synthetic_up_words() {
  static const std::vector<std::string> words = {"surge", "surged", "rise",    "rose",
                                                 "jump",  "jumped", "gain",    "gained",
                                                 "rebound", "climb", "climbed", "rally", "soar"};
  return words;
}

const std::vector<std::string>& synthetic_down_words() {
  static const std::vector<std::string> words = {
      "shrink", "drop",  "dropped", "fall",    "fell",    "plunge", "plunged",
      "slump",  "slumped", "decline", "tumble", "tumbled", "slide",  "slowdown"};
  return words;
}

void SyntheticConfig::validate() const {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError(std::string("synth: ") + name + " must be in [0, 1]");
    }
  };
  if (tickers == 0) throw ValidationError("synth: tickers must be positive");
  if (tickers >= company_pool_size()) {
    throw ValidationError("synth: at most " + std::to_string(company_pool_size() - 1) + " tickers");
  }
  if (group_size == 0) throw ValidationError("synth: group_size must be positive");
  if (!(start < end)) throw ValidationError("synth: start must precede end");
  if (samples_per_day == 0 || samples_per_day > tickers) {
    throw ValidationError("synth: samples_per_day must be in [1, tickers]");
  }
  if (filler_words == 0 || filler_words > filler_pool_size()) {
    throw ValidationError("synth: filler_words must be in [1, " +
                          std::to_string(filler_pool_size()) + "]");
  }
  probability(noise, "noise");
  probability(coupling, "coupling");
  probability(negative_fraction, "negative_fraction");
  probability(object_probability, "object_probability");
  probability(pair_probability, "pair_probability");
  probability(category_probability, "category_probability");
  probability(chatter_probability, "chatter_probability");
  if (!(idiosyncratic >= 0.0)) throw ValidationError("synth: idiosyncratic must be >= 0");
  if (!(move_size > 0.0)) throw ValidationError("synth: move_size must be positive");
  if (!(reversion >= 0.0)) throw ValidationError("synth: reversion must be >= 0");
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);

  std::vector<Date> calendar;
  for (Date d = config.start; d <= config.end; d = d.plus_days(1)) {
    if (!d.is_weekend()) calendar.push_back(d);
  }
  if (calendar.size() < config.warmup_days + 2) {
    throw ValidationError("synth: date range too short for the warmup period");
  }

  auto pool = company_pool(rng);
  const std::vector<Company> companies(pool.begin(), pool.begin() + config.tickers);
  const std::vector<Company> rivals(pool.begin() + config.tickers, pool.end());
  const auto filler = filler_vocabulary(config.filler_words, rng);

  SyntheticData data;
  std::vector<std::size_t> group_of(config.tickers);
  std::vector<int> sign_of(config.tickers);
  for (std::size_t i = 0; i < config.tickers; ++i) {
    const auto g = i / config.group_size;
    if (g == data.groups.size()) data.groups.emplace_back();
    const int sign = data.groups[g].members.empty() || !bernoulli(rng, config.negative_fraction) ? 1 : -1;
    data.groups[g].members.push_back(companies[i].symbol);
    data.groups[g].signs.push_back(sign);
    group_of[i] = g;
    sign_of[i] = sign;
  }

  // Prices.
  std::vector<Factor> group_factors(data.groups.size(), Factor(config.move_size, config.reversion));
  std::vector<Factor> own_factors(config.tickers, Factor(config.move_size, config.reversion));
  std::vector<double> base(config.tickers), eta(config.tickers, 0.0);
  for (auto& b : base) b = uniform(rng, 20.0, 200.0);
  std::vector<std::vector<PricePoint>> closes(config.tickers);
  for (std::size_t t = 0; t < calendar.size(); ++t) {
    for (auto& f : group_factors) {
      if (t > 0) f.step(rng);
    }
    for (std::size_t i = 0; i < config.tickers; ++i) {
      if (t > 0) {
        own_factors[i].step(rng);
        eta[i] = 0.5 * eta[i] + config.idiosyncratic * standard_normal(rng);
      }
      const double x = sign_of[i] * (config.coupling * group_factors[group_of[i]].level() +
                                     (1.0 - config.coupling) * own_factors[i].level()) +
                       eta[i];
      closes[i].push_back({calendar[t], base[i] * std::exp(x)});
    }
  }
  for (std::size_t i = 0; i < config.tickers; ++i) {
    data.prices.emplace_back(companies[i].symbol, std::move(closes[i]));
  }

  // News.
  TextWriter writer(filler, rng);
  std::vector<std::size_t> order(config.tickers);
  for (std::size_t t = config.warmup_days; t + 1 < calendar.size(); ++t) {
    const Date day = calendar[t];
    for (std::size_t i = 0; i < config.tickers; ++i) order[i] = i;
    shuffle(std::span<std::size_t>(order), rng);

    std::vector<std::size_t> picked(order.begin(), order.begin() + config.samples_per_day);
    std::vector<Label> implied;
    for (auto i : picked) {
      const auto actual = movement_label(data.prices[i], day);
      Label l = actual.value_or(Label::positive);
      if (bernoulli(rng, config.noise)) l = invert(l);
      implied.push_back(l);
    }

    for (std::size_t k = 0; k < picked.size(); ++k) {
      const auto& c = companies[picked[k]];
      const Label dir = implied[k];
      std::vector<std::string> sentences;
      if (bernoulli(rng, config.object_probability)) {
        sentences.push_back(writer.object_sentence(c, rivals[uniform_index(rng, rivals.size())], dir));
      } else {
        sentences.push_back(writer.subject_sentence(c, dir));
      }
      if (bernoulli(rng, config.category_probability)) {
        sentences.push_back(writer.category_sentence(c, dir));
      }
      if (bernoulli(rng, config.pair_probability)) {
        for (std::size_t j = k + 1; j < picked.size(); ++j) {
          if (implied[j] != dir) {
            sentences.push_back(writer.pair_sentence(c, dir, companies[picked[j]], implied[j]));
            break;
          }
        }
      }
      if (bernoulli(rng, config.chatter_probability)) {
        sentences.push_back(writer.chatter_sentence(c));
      }
      shuffle(std::span<std::string>(sentences), rng);

      std::string body;
      for (const auto& s : sentences) {
        if (!body.empty()) body += ' ';
        body += s;
      }
      data.articles.push_back(Article{"syn-" + day.to_string() + "-" + std::to_string(k), day,
                                      "Market update: " + c.name, body, "synthetic-wire"});
    }
  }

  for (const auto& c : companies) {
    data.aliases.emplace_back(c.name, c.symbol);
    data.aliases.emplace_back(c.symbol, c.symbol);
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& articles,
                     const std::filesystem::path& prices, const std::filesystem::path& aliases) {
  write_articles(articles, data.articles);
  Date first = Date::from_days(0), last = Date::from_days(0);
  bool any = false;
  for (const auto& series : data.prices) {
    if (series.size() == 0) continue;
    if (!any || series[0].date < first) first = series[0].date;
    if (!any || series[series.size() - 1].date > last) last = series[series.size() - 1].date;
    any = true;
  }
  write_prices(prices, PriceTable(data.prices, DateRange{first, last}));
  std::ofstream out(aliases, std::ios::binary);
  if (!out) throw IoError("cannot write " + aliases.string());
  out << "alias,ticker\n";
  for (const auto& [alias, ticker] : data.aliases) out << alias << ',' << ticker << '\n';
  if (!out) throw IoError("failed writing " + aliases.string());
}

}  // namespace newsmotion
