#include "newsmotion/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "newsmotion/corr_graph.hpp"
#include "newsmotion/data_ingest.hpp"
#include "newsmotion/embedding.hpp"
#include "newsmotion/evaluation.hpp"
#include "newsmotion/features.hpp"
#include "newsmotion/lexicon.hpp"
#include "newsmotion/mlp.hpp"
#include "newsmotion/sampling.hpp"
#include "newsmotion/strings.hpp"
#include "newsmotion/synth.hpp"
#include "newsmotion/text.hpp"

namespace newsmotion {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 9> kStageNames{{
    {Stage::synth, "synth"},
    {Stage::ingest, "ingest"},
    {Stage::embed, "embed"},
    {Stage::lexicon, "lexicon"},
    {Stage::featurize, "featurize"},
    {Stage::train, "train"},
    {Stage::graph, "graph"},
    {Stage::predict, "predict"},
    {Stage::evaluate, "evaluate"},
}};

const char* kSplits[] = {"train", "valid", "test"};

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("sha256 initialisation failed");
    }
  }
  ~Digest() { EVP_MD_CTX_free(ctx_); }
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("sha256 update failed");
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1) throw Error("sha256 finalisation failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

template <typename T>
std::string join(const std::vector<T>& items, const char* sep) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << sep;
    if constexpr (std::is_same_v<T, double>) out << format_double(items[i]);
    else out << items[i];
  }
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string samples_file(const char* split) { return std::string("samples_") + split + ".jsonl"; }
std::string features_file(const char* split) { return std::string("features_") + split + ".csv"; }

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

const std::vector<Stage>& pipeline_stages() {
  static const std::vector<Stage> stages{Stage::ingest, Stage::embed, Stage::lexicon,
                                         Stage::featurize, Stage::train, Stage::graph,
                                         Stage::predict, Stage::evaluate};
  return stages;
}

std::vector<Stage> upstream_of(Stage stage) {
  switch (stage) {
    case Stage::synth:
    case Stage::ingest:
    case Stage::graph:
      return {};
    case Stage::embed:
      return {Stage::ingest};
    case Stage::lexicon:
      return {Stage::ingest, Stage::embed};
    case Stage::featurize:
      return {Stage::ingest, Stage::lexicon};
    case Stage::train:
      return {Stage::featurize};
    case Stage::predict:
    case Stage::evaluate:
      return {Stage::featurize, Stage::train, Stage::graph};
  }
  return {};
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

std::string sha256_text(std::string_view text) {
  Digest d;
  d.update(text.data(), text.size());
  return d.hex();
}

WorkDirLock::WorkDirLock(const fs::path& work_dir) : path_(work_dir / ".newsmotion.lock") {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw LockError("work directory " + work_dir.string() + " is locked by another run (" +
                      path_.string() + ")");
    }
    throw IoError("cannot create lock file " + path_.string() + ": " + std::strerror(errno));
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkDirLock::~WorkDirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["version"] = version;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : inputs) j["inputs"][k] = v;
  j["outputs"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : outputs) j["outputs"][k] = v;
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Manifest m;
    m.stage = j.at("stage").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) { config_.validate(); }

fs::path Pipeline::manifest_path(Stage stage) const {
  return artifact(std::string(to_string(stage)) + ".manifest.json");
}

Pipeline::Plan Pipeline::plan(Stage stage) const {
  const auto& c = config_;
  Plan p;
  std::ostringstream fp;
  fp << "stage=" << to_string(stage) << '\n';
  auto training_window = [&] { fp << "training_window=" << c.dates.training_window().to_string() << '\n'; };
  auto train_config = [&] {
    const auto& t = c.train;
    fp << "hidden=" << join(t.hidden, ",") << "\nlearning_rate=" << format_double(t.learning_rate)
       << "\nlr_decay=" << format_double(t.lr_decay) << "\ndecay_every=" << t.decay_every
       << "\nbatch_size=" << t.batch_size << "\nepochs=" << t.epochs << "\nl2=" << format_double(t.l2)
       << "\npatience=" << t.patience << "\nseed=" << t.seed << '\n';
  };
  auto propagation = [&] {
    fp << "iterations=" << c.sweep.iterations << "\nclamp=" << c.sweep.clamp_observed << '\n';
  };
  auto add_splits = [&](auto name_of) {
    for (const char* split : kSplits) p.inputs[name_of(split)] = artifact(name_of(split));
  };

  switch (stage) {
    case Stage::synth: {
      const auto& s = c.synth;
      fp << "seed=" << s.seed << "\ntickers=" << s.tickers << "\ngroup_size=" << s.group_size
         << "\nstart=" << s.start.to_string() << "\nend=" << s.end.to_string()
         << "\nwarmup_days=" << s.warmup_days << "\nsamples_per_day=" << s.samples_per_day
         << "\nnoise=" << format_double(s.noise) << "\ncoupling=" << format_double(s.coupling)
         << "\nnegative_fraction=" << format_double(s.negative_fraction)
         << "\nidiosyncratic=" << format_double(s.idiosyncratic) << "\nmove_size=" << format_double(s.move_size)
         << "\nreversion=" << format_double(s.reversion) << "\nfiller_words=" << s.filler_words
         << "\nobject_probability=" << format_double(s.object_probability)
         << "\npair_probability=" << format_double(s.pair_probability)
         << "\ncategory_probability=" << format_double(s.category_probability)
         << "\nchatter_probability=" << format_double(s.chatter_probability) << '\n';
      p.outputs = {c.paths.articles, c.paths.prices, c.paths.aliases};
      p.seed = s.seed;
      break;
    }
    case Stage::ingest:
      p.inputs["articles"] = c.paths.articles;
      p.inputs["prices"] = c.paths.prices;
      p.inputs["aliases"] = c.paths.aliases;
      if (c.paths.abbreviations) p.inputs["abbreviations"] = *c.paths.abbreviations;
      training_window();
      fp << "valid_end=" << c.dates.valid_end.to_string() << '\n';
      for (const char* split : kSplits) p.outputs.push_back(artifact(samples_file(split)));
      break;
    case Stage::embed: {
      const auto& e = c.embedding;
      p.inputs[samples_file("train")] = artifact(samples_file("train"));
      fp << "dimension=" << e.dimension << "\nwindow=" << e.window << "\nnegative=" << e.negative
         << "\nepochs=" << e.epochs << "\nlearning_rate=" << format_double(e.learning_rate)
         << "\nmin_count=" << e.min_count << "\nseed=" << e.seed << '\n';
      p.outputs = {artifact("embeddings.txt")};
      p.seed = e.seed;
      break;
    }
    case Stage::lexicon:
      p.inputs["embeddings.txt"] = artifact("embeddings.txt");
      p.inputs[samples_file("train")] = artifact(samples_file("train"));
      if (c.paths.category_seeds) p.inputs["category_seeds"] = *c.paths.category_seeds;
      fp << "keywords=" << c.lexicon.keywords << "\ncategory_words=" << c.lexicon.category_words
         << "\nseeds=" << join(c.lexicon.seeds, ",") << '\n';
      p.outputs = {artifact("lexicon.csv"), artifact("categories.csv")};
      break;
    case Stage::featurize:
      add_splits(samples_file);
      p.inputs["prices"] = c.paths.prices;
      p.inputs["lexicon.csv"] = artifact("lexicon.csv");
      p.inputs["categories.csv"] = artifact("categories.csv");
      training_window();
      for (const char* split : kSplits) p.outputs.push_back(artifact(features_file(split)));
      p.outputs.push_back(artifact("skipped.csv"));
      break;
    case Stage::train:
      p.inputs[features_file("train")] = artifact(features_file("train"));
      p.inputs[features_file("valid")] = artifact(features_file("valid"));
      train_config();
      fp << "blocks=" << c.train_blocks.name() << '\n';
      p.outputs = {artifact("model.bin")};
      p.seed = c.train.seed;
      break;
    case Stage::graph:
      p.inputs["prices"] = c.paths.prices;
      fp << "threshold=" << format_double(c.graph.threshold) << "\nmin_overlap=" << c.graph.min_overlap
         << "\nwindow=" << c.graph.window.value_or(c.dates.training_window()).to_string() << '\n';
      p.outputs = {artifact("graph.csv")};
      break;
    case Stage::predict:
      p.inputs["model.bin"] = artifact("model.bin");
      p.inputs[features_file("test")] = artifact(features_file("test"));
      p.inputs["graph.csv"] = artifact("graph.csv");
      fp << "threshold=" << format_double(c.predict_threshold) << '\n';
      propagation();
      p.outputs = {artifact("predictions.csv")};
      break;
    case Stage::evaluate: {
      add_splits(features_file);
      p.inputs["model.bin"] = artifact("model.bin");
      p.inputs["graph.csv"] = artifact("graph.csv");
      p.inputs["prices"] = c.paths.prices;
      train_config();
      std::vector<std::string> names;
      for (const auto& b : c.ablation) names.push_back(b.name());
      fp << "combinations=" << join(names, ",") << "\ntaus=" << join(c.sweep.taus, ",") << '\n';
      training_window();
      propagation();
      p.outputs = {artifact("ablation.csv"), artifact("ablation.txt"), artifact("sweep.csv"),
                   artifact("sweep.txt")};
      p.seed = c.train.seed;
      break;
    }
  }
  if (p.seed == 0 && stage != Stage::synth) p.seed = c.seed;
  p.fingerprint = fp.str();
  return p;
}

bool Pipeline::run(Stage stage, bool force) {
  const auto name = std::string(to_string(stage));

  std::vector<std::string> missing;
  for (Stage up : upstream_of(stage)) {
    if (!fs::exists(manifest_path(up))) missing.emplace_back(to_string(up));
  }
  if (!missing.empty()) {
    throw StageOrderError("cannot run " + name + " before " + join(missing, ", ") + ": run `newsmotion " +
                          missing.front() + "` first");
  }
  const auto p = plan(stage);
  for (const auto& [role, path] : p.inputs) {
    if (!fs::exists(path)) {
      const bool raw = role == "articles" || role == "prices" || role == "aliases";
      throw StageOrderError("input '" + role + "' of " + name + " not found at " + path.string() +
                            (raw ? " (run `newsmotion synth` or set paths." + role + ")" : ""));
    }
  }

  fs::create_directories(config_.paths.work_dir);
  WorkDirLock lock(config_.paths.work_dir);

  Manifest m;
  m.stage = name;
  m.version = std::string(kVersion);
  m.seed = p.seed;
  m.config = p.fingerprint;
  m.config_hash = sha256_text(p.fingerprint);
  for (const auto& [role, path] : p.inputs) m.inputs[role] = sha256_file(path);

  const auto mpath = manifest_path(stage);
  if (!force && fs::exists(mpath)) {
    try {
      auto previous = Manifest::from_json(read_text(mpath));
      bool current = previous.inputs == m.inputs && previous.config_hash == m.config_hash &&
                     previous.seed == m.seed && previous.version == m.version &&
                     previous.outputs.size() == p.outputs.size();
      for (const auto& out : p.outputs) {
        if (!current) break;
        const auto it = previous.outputs.find(out.filename().string());
        current = it != previous.outputs.end() && fs::exists(out) && sha256_file(out) == it->second;
      }
      if (current) {
        spdlog::info("{}: up to date, skipping", name);
        return false;
      }
    } catch (const Error& e) {
      spdlog::warn("{}: ignoring unreadable manifest: {}", name, e.what());
    }
  }

  std::error_code ec;
  fs::remove(mpath, ec);
  spdlog::info("{}: running", name);
  execute(stage);
  for (const auto& out : p.outputs) m.outputs[out.filename().string()] = sha256_file(out);
  write_text(mpath, m.to_json());
  return true;
}

void Pipeline::execute(Stage stage) {
  switch (stage) {
    case Stage::synth: return run_synth();
    case Stage::ingest: return run_ingest();
    case Stage::embed: return run_embed();
    case Stage::lexicon: return run_lexicon();
    case Stage::featurize: return run_featurize();
    case Stage::train: return run_train();
    case Stage::graph: return run_graph();
    case Stage::predict: return run_predict();
    case Stage::evaluate: return run_evaluate();
  }
}

void Pipeline::run_synth() {
  const auto& paths = config_.paths;
  for (const auto& p : {paths.articles, paths.prices, paths.aliases}) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  }
  const auto data = generate_synthetic(config_.synth);
  write_synthetic(data, paths.articles, paths.prices, paths.aliases);
  spdlog::info("synth: {} articles, {} tickers in {} groups", data.articles.size(), data.prices.size(),
               data.groups.size());
}

void Pipeline::run_ingest() {
  const auto& c = config_;
  const auto prices = load_prices(c.paths.prices, c.dates.training_window());
  const auto aliases = AliasTable::load(c.paths.aliases);
  const auto abbreviations =
      c.paths.abbreviations ? AbbreviationList::load(*c.paths.abbreviations) : AbbreviationList::defaults();
  for (const auto& t : prices.unnormalizable_tickers()) {
    spdlog::warn("ingest: {} has too few training closes to normalise", t);
  }
  for (const auto& t : aliases.tickers()) {
    if (prices.find(t) == nullptr) spdlog::warn("ingest: alias ticker {} has no prices", t);
  }

  const auto articles = load_articles(c.paths.articles);
  const auto sentences = extract_sentences(articles, aliases, abbreviations);
  const auto samples = build_samples(sentences, prices);
  const auto split = split_by_date(samples, c.dates.train_end, c.dates.valid_end);
  const auto unlabeled = samples.size() - split.train.size() - split.validation.size() - split.test.size();

  write_samples(artifact(samples_file("train")), split.train);
  write_samples(artifact(samples_file("valid")), split.validation);
  write_samples(artifact(samples_file("test")), split.test);
  spdlog::info("ingest: {} articles, {} samples ({} train, {} valid, {} test, {} unlabeled)",
               articles.size(), samples.size(), split.train.size(), split.validation.size(),
               split.test.size(), unlabeled);
  if (split.train.empty()) throw ValidationError("no labeled training samples");
}

void Pipeline::run_embed() {
  const auto train = load_samples(artifact(samples_file("train")));
  std::vector<std::vector<std::string>> corpus;
  std::set<std::pair<Date, std::string>> seen;  // a sentence naming two tickers sits in two samples
  for (const auto& s : train) {
    for (const auto& sentence : s.sentences) {
      if (seen.emplace(s.date, sentence.text).second) corpus.push_back(tokenize(sentence.text));
    }
  }
  const auto result = train_skipgram(corpus, config_.embedding);
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    spdlog::info("embed: epoch {} loss {:.5f}", e + 1, result.epoch_losses[e]);
  }
  write_embeddings(artifact("embeddings.txt"), result.table);
  spdlog::info("embed: {} words from {} sentences", result.table.size(), corpus.size());
}

void Pipeline::run_lexicon() {
  const auto& c = config_;
  const auto table = load_embeddings(artifact("embeddings.txt"));
  const auto train = load_samples(artifact(samples_file("train")));
  const auto keywords = build_keyword_lexicon(table, c.lexicon.seeds, train, c.lexicon.keywords);
  const auto seeds = c.paths.category_seeds ? load_category_seeds(*c.paths.category_seeds)
                                            : default_category_seeds();
  const auto categories = build_category_lexicon(table, seeds, c.lexicon.category_words);
  for (const auto& w : keywords.warnings) spdlog::warn("lexicon: {}", w);
  for (const auto& w : categories.warnings) spdlog::warn("lexicon: {}", w);
  write_keyword_lexicon(artifact("lexicon.csv"), keywords);
  write_category_lexicon(artifact("categories.csv"), categories);
  spdlog::info("lexicon: {} keywords, {} categories", keywords.size(), categories.size());
}

void Pipeline::run_featurize() {
  const auto& c = config_;
  const auto prices = load_prices(c.paths.prices, c.dates.training_window());
  const auto keywords = load_keyword_lexicon(artifact("lexicon.csv"));
  const auto categories = load_category_lexicon(artifact("categories.csv"));
  const NearestLeftMentionDetector detector;
  const Featurizer featurizer(prices, &keywords, &categories, detector, BlockSet::all());

  std::ostringstream skipped;
  skipped << "split,ticker,date,reason\n";
  for (const char* split : kSplits) {
    const auto samples = load_samples(artifact(samples_file(split)));
    const auto result = featurizer.run(samples);
    write_feature_matrix(artifact(features_file(split)), result.matrix);
    for (const auto& s : result.skipped) {
      skipped << split << ',' << s.ticker << ',' << s.date.to_string() << ',' << s.reason << '\n';
    }
    spdlog::info("featurize: {} {} rows ({} skipped), layout {}", split, result.matrix.rows.size(),
                 result.skipped.size(), result.matrix.layout.to_string());
  }
  write_text(artifact("skipped.csv"), skipped.str());
}

void Pipeline::run_train() {
  const auto train = load_feature_matrix(artifact(features_file("train"))).select(config_.train_blocks);
  const auto valid = load_feature_matrix(artifact(features_file("valid"))).select(config_.train_blocks);
  const auto model = newsmotion::train(train, valid, config_.train);
  const auto& meta = model.metadata();
  for (std::size_t e = 0; e < meta.train_loss.size(); ++e) {
    spdlog::info("train: epoch {} loss {:.5f} validation error {:.4f}", e + 1, meta.train_loss[e],
                 meta.valid_error[e]);
  }
  spdlog::info("train: keeping epoch {} of {}", meta.best_epoch, meta.epochs_run);
  save_model(artifact("model.bin"), model);
}

void Pipeline::run_graph() {
  const auto& c = config_;
  const auto prices = load_prices(c.paths.prices, c.dates.training_window());
  GraphParams params;
  params.threshold = c.graph.threshold;
  params.min_overlap = c.graph.min_overlap;
  params.window = c.graph.window.value_or(c.dates.training_window());
  const auto universe = prices.tickers();
  const auto graph = build_graph(prices, universe, params);
  save_graph(artifact("graph.csv"), graph);
  spdlog::info("graph: {} nodes, {} edges", graph.size(), graph.edge_count());
}

void Pipeline::run_predict() {
  const auto& c = config_;
  const auto model = load_model(artifact("model.bin"));
  const auto test = load_feature_matrix(artifact(features_file("test"))).select(model.layout().blocks());
  const auto graph = load_graph(artifact("graph.csv"));

  std::ostringstream out;
  out << "date,ticker,source,label,confidence\n";
  std::size_t propagated = 0;
  for (const auto& day : predict_by_date(model, test)) {
    for (const auto& [ticker, confidence] : day.confidences) {
      const auto label = confidence > 0.0 ? Label::positive : Label::negative;
      out << day.date.to_string() << ',' << ticker << ",dnn," << to_string(label) << ','
          << format_double(confidence) << '\n';
    }
    const auto x = PredictionVector::from_observations(graph, day.confidences);
    const auto xp = propagate(graph, x, c.sweep.iterations, c.sweep.clamp_observed);
    for (const auto& [ticker, p] : threshold_predictions(graph, xp, c.predict_threshold)) {
      out << day.date.to_string() << ',' << ticker << ",propagated," << to_string(p.label) << ','
          << format_double(p.confidence) << '\n';
      ++propagated;
    }
  }
  write_text(artifact("predictions.csv"), out.str());
  spdlog::info("predict: {} test samples, {} propagated predictions", test.rows.size(), propagated);
}

void Pipeline::run_evaluate() {
  const auto& c = config_;
  const auto train = load_feature_matrix(artifact(features_file("train")));
  const auto valid = load_feature_matrix(artifact(features_file("valid")));
  const auto test = load_feature_matrix(artifact(features_file("test")));
  const auto model = load_model(artifact("model.bin"));
  const auto graph = load_graph(artifact("graph.csv"));
  const auto prices = load_prices(c.paths.prices, c.dates.training_window());

  const auto ablation = run_ablation(train, valid, test, c.ablation, c.train);
  write_text(artifact("ablation.csv"), ablation.to_csv());
  write_text(artifact("ablation.txt"), ablation.to_text());

  const auto days = predict_by_date(model, test.select(model.layout().blocks()));
  const auto sweep = run_propagation_sweep(days, graph, prices, c.sweep.taus,
                                           {c.sweep.iterations, c.sweep.clamp_observed});
  write_text(artifact("sweep.csv"), sweep.to_csv());
  write_text(artifact("sweep.txt"), sweep.to_text());
}

}  // namespace newsmotion
