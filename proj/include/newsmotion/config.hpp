#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "newsmotion/corr_graph.hpp"
#include "newsmotion/date.hpp"
#include "newsmotion/embedding.hpp"
#include "newsmotion/features.hpp"
#include "newsmotion/mlp.hpp"
#include "newsmotion/synth.hpp"

namespace newsmotion {

struct PathsConfig {
  std::filesystem::path work_dir = "work";
  std::filesystem::path articles;  // default <work_dir>/articles.jsonl
  std::filesystem::path prices;    // default <work_dir>/prices.csv
  std::filesystem::path aliases;   // default <work_dir>/aliases.csv
  std::optional<std::filesystem::path> category_seeds;
  std::optional<std::filesystem::path> abbreviations;
};

struct DatesConfig {
  Date train_start = Date::from_ymd(1900, 1, 1);
  Date train_end = Date::from_ymd(2012, 12, 31);
  Date valid_end = Date::from_ymd(2013, 6, 30);

  DateRange training_window() const { return {train_start, train_end}; }
};

struct LexiconConfig {
  std::size_t keywords = 1000;           // K
  std::size_t category_words = 100;      // M
  std::vector<std::string> seeds;        // default: the nine keyword seeds
};

struct GraphConfig {
  double threshold = 0.8;
  std::size_t min_overlap = 252;
  std::optional<DateRange> window;       // default: the training window
};

struct SweepConfig {
  std::vector<double> taus{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t iterations = 1;
  bool clamp_observed = false;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  PathsConfig paths;
  DatesConfig dates;
  LexiconConfig lexicon;
  SkipGramConfig embedding;
  TrainConfig train;
  BlockSet train_blocks = BlockSet::all();
  GraphConfig graph;
  SweepConfig sweep;
  double predict_threshold = 0.8;
  std::vector<BlockSet> ablation;
  SyntheticConfig synth;

  // Throws ValidationError describing the first violated constraint.
  void validate() const;
};

// INI file with [section] headers and key = value lines. `overrides` are
// "section.key=value" strings applied after the file and winning over it.
// Relative paths in the file resolve against its directory, relative paths in
// overrides against the current directory. Unknown keys are rejected.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides = {});

// Every key with its default, as an INI document.
std::string default_config_text();

}  // namespace newsmotion
