#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "newsmotion/data_ingest.hpp"

namespace newsmotion {

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t tickers = 50;
  std::size_t group_size = 5;        // tickers driven by one common factor
  Date start = Date::from_ymd(2010, 1, 1);
  Date end = Date::from_ymd(2013, 12, 31);
  std::size_t warmup_days = 10;      // trading days without news at the start
  std::size_t samples_per_day = 5;   // distinct tickers in the news per trading day
  double noise = 0.1;                // chance a sample's text implies the wrong direction
  double coupling = 1.0;             // weight of the group factor in member prices
  double negative_fraction = 0.2;    // members that move against their group factor
  double idiosyncratic = 0.0005;     // std of per-ticker log-price noise
  double move_size = 0.01;           // typical daily log move of a factor
  double reversion = 20.0;           // pull of factors back to their mean level
  std::size_t filler_words = 1100;   // size of the neutral pseudo-word vocabulary
  double object_probability = 0.2;   // keyword sentence with the ticker as object
  double pair_probability = 0.2;     // joint sentence for two opposite movers
  double category_probability = 0.6;
  double chatter_probability = 0.1;  // extra sentence without signal words

  void validate() const;
};

struct SyntheticGroup {
  std::vector<std::string> members;  // first member carries the factor with sign +1
  std::vector<int> signs;            // +1 or -1 per member
};

struct SyntheticData {
  std::vector<Article> articles;
  std::vector<PriceSeries> prices;
  std::vector<std::pair<std::string, std::string>> aliases;  // (alias, ticker)
  std::vector<SyntheticGroup> groups;
};

// Word lists whose subject-adjusted occurrences determine a sample's planted direction.
const std::vector<std::string>& synthetic_up_words();
const std::vector<std::string>& synthetic_down_words();

// Deterministic in config.seed. News text encodes each mentioned ticker's actual
// next-day movement (flipped with probability `noise`); price moves are coin
// flips, so price history carries no directional signal.
SyntheticData generate_synthetic(const SyntheticConfig& config);

void write_synthetic(const SyntheticData& data, const std::filesystem::path& articles,
                     const std::filesystem::path& prices, const std::filesystem::path& aliases);

inline void generate_synthetic_fixture(const SyntheticConfig& config,
                                       const std::filesystem::path& articles,
                                       const std::filesystem::path& prices,
                                       const std::filesystem::path& aliases) {
  write_synthetic(generate_synthetic(config), articles, prices, aliases);
}

}  // namespace newsmotion
