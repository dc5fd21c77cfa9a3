#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsmotion/config.hpp"
#include "newsmotion/errors.hpp"

namespace newsmotion {

enum class Stage { synth, ingest, embed, lexicon, featurize, train, graph, predict, evaluate };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);
// ingest through evaluate, in dependency order.
const std::vector<Stage>& pipeline_stages();
// Stages whose manifests must exist before `stage` can run.
std::vector<Stage> upstream_of(Stage stage);

// A stage was requested before the stages it depends on.
class StageOrderError : public Error {
 public:
  using Error::Error;
};

class LockError : public Error {
 public:
  using Error::Error;
};

std::string sha256_file(const std::filesystem::path& path);
std::string sha256_text(std::string_view text);

// Exclusive advisory lock on a work directory, released on destruction.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& work_dir);
  ~WorkDirLock();
  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct Manifest {
  std::string stage;
  std::string version;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string config;
  std::map<std::string, std::string> inputs;   // role -> sha256
  std::map<std::string, std::string> outputs;  // file name -> sha256

  std::string to_json() const;
  static Manifest from_json(std::string_view text);
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  // Runs one stage. Returns false when the recorded manifest already matches
  // the current inputs and configuration and `force` is not set.
  bool run(Stage stage, bool force = false);

  const PipelineConfig& config() const noexcept { return config_; }
  std::filesystem::path artifact(std::string_view name) const { return config_.paths.work_dir / name; }
  std::filesystem::path manifest_path(Stage stage) const;

 private:
  struct Plan {
    std::map<std::string, std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::string fingerprint;
    std::uint64_t seed = 0;
  };

  Plan plan(Stage stage) const;
  void execute(Stage stage);

  void run_synth();
  void run_ingest();
  void run_embed();
  void run_lexicon();
  void run_featurize();
  void run_train();
  void run_graph();
  void run_predict();
  void run_evaluate();

  PipelineConfig config_;
};

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace newsmotion
