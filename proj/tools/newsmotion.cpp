#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "newsmotion/config.hpp"
#include "newsmotion/pipeline.hpp"

namespace {

void print_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (in) std::cout << in.rdbuf() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace newsmotion;

  CLI::App app{"newsmotion: stock movement prediction from financial news"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool force = false;
  bool verbose = false;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "override a config value, e.g. --set train.epochs=10")
      ->take_all();
  app.add_flag("-f,--force", force, "rerun stages even when their manifest matches");
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "generate a synthetic articles/prices/aliases fixture"},
      {"ingest", "split articles into labeled samples"},
      {"embed", "train skip-gram word embeddings on training samples"},
      {"lexicon", "expand keyword and category lexicons"},
      {"featurize", "compute price, BoK, PS and CT features"},
      {"train", "train the MLP classifier"},
      {"graph", "build the price correlation graph"},
      {"predict", "predict test samples and propagate to unseen stocks"},
      {"evaluate", "write the feature ablation and propagation sweep reports"},
      {"all", "run ingest through evaluate"},
      {"defaults", "print every config key with its default value"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto logger = spdlog::stderr_color_mt("newsmotion");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "defaults") {
    std::cout << default_config_text();
    return 0;
  }

  std::optional<PipelineConfig> config;
  try {
    config = load_config(config_path.empty() ? std::nullopt
                                             : std::optional<std::filesystem::path>(config_path),
                         overrides);
  } catch (const Error& e) {
    spdlog::error("invalid configuration: {}", e.what());
    return 1;
  }

  try {
    Pipeline pipeline(*config);
    if (command == "all") {
      for (Stage stage : pipeline_stages()) pipeline.run(stage, force);
    } else {
      pipeline.run(*parse_stage(command), force);
    }
    if (command == "all" || command == "evaluate") {
      print_file(pipeline.artifact("ablation.txt"));
      print_file(pipeline.artifact("sweep.txt"));
    }
  } catch (const StageOrderError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
