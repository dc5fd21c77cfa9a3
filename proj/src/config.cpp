#include "newsmotion/config.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "newsmotion/errors.hpp"
#include "newsmotion/evaluation.hpp"
#include "newsmotion/lexicon.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

namespace fs = std::filesystem;

namespace {

struct Context {
  fs::path base;  // directory relative paths resolve against
  std::set<std::string> explicit_keys;
};

using Setter = std::function<void(PipelineConfig&, const std::string&, const Context&)>;

fs::path resolve(const std::string& value, const Context& ctx) {
  fs::path p(value);
  return p.is_absolute() ? p : (ctx.base / p).lexically_normal();
}

bool parse_bool(std::string_view text) {
  const auto v = to_lower(trim(text));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ValidationError("expected a boolean, got '" + std::string(text) + "'");
}

std::uint64_t parse_u64(std::string_view text) { return static_cast<std::uint64_t>(parse_size(trim(text))); }

std::vector<std::string> parse_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  for (auto item : split(text, sep)) {
    item = trim(item);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : parse_list(text, ',')) out.push_back(parse_size(item));
  return out;
}

std::vector<double> parse_doubles(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : parse_list(text, ',')) out.push_back(parse_double(item));
  return out;
}

#define SIZE(field) [](PipelineConfig& c, const std::string& v, const Context&) { c.field = parse_size(trim(v)); }
#define REAL(field) [](PipelineConfig& c, const std::string& v, const Context&) { c.field = parse_double(trim(v)); }
#define U64(field) [](PipelineConfig& c, const std::string& v, const Context&) { c.field = parse_u64(v); }
#define DATE(field) [](PipelineConfig& c, const std::string& v, const Context&) { c.field = Date::parse(trim(v)); }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed", U64(seed)},
      {"paths.work_dir", [](PipelineConfig& c, const std::string& v, const Context& x) { c.paths.work_dir = resolve(v, x); }},
      {"paths.articles", [](PipelineConfig& c, const std::string& v, const Context& x) { c.paths.articles = resolve(v, x); }},
      {"paths.prices", [](PipelineConfig& c, const std::string& v, const Context& x) { c.paths.prices = resolve(v, x); }},
      {"paths.aliases", [](PipelineConfig& c, const std::string& v, const Context& x) { c.paths.aliases = resolve(v, x); }},
      {"paths.category_seeds",
       [](PipelineConfig& c, const std::string& v, const Context& x) {
         if (trim(v).empty()) c.paths.category_seeds.reset();
         else c.paths.category_seeds = resolve(v, x);
       }},
      {"paths.abbreviations",
       [](PipelineConfig& c, const std::string& v, const Context& x) {
         if (trim(v).empty()) c.paths.abbreviations.reset();
         else c.paths.abbreviations = resolve(v, x);
       }},
      {"dates.train_start", DATE(dates.train_start)},
      {"dates.train_end", DATE(dates.train_end)},
      {"dates.valid_end", DATE(dates.valid_end)},
      {"lexicon.keywords", SIZE(lexicon.keywords)},
      {"lexicon.category_words", SIZE(lexicon.category_words)},
      {"lexicon.seeds", [](PipelineConfig& c, const std::string& v, const Context&) { c.lexicon.seeds = parse_list(v, ','); }},
      {"embedding.dimension", SIZE(embedding.dimension)},
      {"embedding.window", SIZE(embedding.window)},
      {"embedding.negative", SIZE(embedding.negative)},
      {"embedding.epochs", SIZE(embedding.epochs)},
      {"embedding.learning_rate", REAL(embedding.learning_rate)},
      {"embedding.min_count", SIZE(embedding.min_count)},
      {"embedding.seed", U64(embedding.seed)},
      {"train.hidden", [](PipelineConfig& c, const std::string& v, const Context&) { c.train.hidden = parse_sizes(v); }},
      {"train.learning_rate", REAL(train.learning_rate)},
      {"train.lr_decay", REAL(train.lr_decay)},
      {"train.decay_every", SIZE(train.decay_every)},
      {"train.batch_size", SIZE(train.batch_size)},
      {"train.epochs", SIZE(train.epochs)},
      {"train.l2", REAL(train.l2)},
      {"train.patience", SIZE(train.patience)},
      {"train.seed", U64(train.seed)},
      {"train.blocks", [](PipelineConfig& c, const std::string& v, const Context&) { c.train_blocks = BlockSet::parse(trim(v)); }},
      {"graph.threshold", REAL(graph.threshold)},
      {"graph.min_overlap", SIZE(graph.min_overlap)},
      {"graph.window",
       [](PipelineConfig& c, const std::string& v, const Context&) {
         if (trim(v).empty()) c.graph.window.reset();
         else c.graph.window = DateRange::parse(trim(v));
       }},
      {"sweep.taus", [](PipelineConfig& c, const std::string& v, const Context&) { c.sweep.taus = parse_doubles(v); }},
      {"sweep.iterations", SIZE(sweep.iterations)},
      {"sweep.clamp", [](PipelineConfig& c, const std::string& v, const Context&) { c.sweep.clamp_observed = parse_bool(v); }},
      {"predict.threshold", REAL(predict_threshold)},
      {"ablation.combinations",
       [](PipelineConfig& c, const std::string& v, const Context&) {
         c.ablation.clear();
         for (const auto& name : parse_list(v, ',')) c.ablation.push_back(BlockSet::parse(name));
       }},
      {"synth.seed", U64(synth.seed)},
      {"synth.tickers", SIZE(synth.tickers)},
      {"synth.group_size", SIZE(synth.group_size)},
      {"synth.start", DATE(synth.start)},
      {"synth.end", DATE(synth.end)},
      {"synth.warmup_days", SIZE(synth.warmup_days)},
      {"synth.samples_per_day", SIZE(synth.samples_per_day)},
      {"synth.noise", REAL(synth.noise)},
      {"synth.coupling", REAL(synth.coupling)},
      {"synth.negative_fraction", REAL(synth.negative_fraction)},
      {"synth.idiosyncratic", REAL(synth.idiosyncratic)},
      {"synth.move_size", REAL(synth.move_size)},
      {"synth.reversion", REAL(synth.reversion)},
      {"synth.filler_words", SIZE(synth.filler_words)},
      {"synth.object_probability", REAL(synth.object_probability)},
      {"synth.pair_probability", REAL(synth.pair_probability)},
      {"synth.category_probability", REAL(synth.category_probability)},
      {"synth.chatter_probability", REAL(synth.chatter_probability)},
  };
  return table;
}

#undef SIZE
#undef REAL
#undef U64
#undef DATE

void apply(PipelineConfig& config, const std::string& key, const std::string& value, Context& ctx) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ValidationError("unknown config key '" + key + "'");
  try {
    it->second(config, value, ctx);
  } catch (const Error& e) {
    throw ValidationError("config key '" + key + "': " + e.what());
  }
  ctx.explicit_keys.insert(key);
}

}  // namespace

void PipelineConfig::validate() const {
  if (lexicon.keywords == 0) throw ValidationError("lexicon.keywords must be positive");
  if (lexicon.category_words == 0) throw ValidationError("lexicon.category_words must be positive");
  if (lexicon.seeds.empty()) throw ValidationError("lexicon.seeds must not be empty");
  if (!(dates.train_start <= dates.train_end)) throw ValidationError("dates.train_start must not follow dates.train_end");
  if (!(dates.train_end < dates.valid_end)) throw ValidationError("dates.train_end must precede dates.valid_end");
  if (!(graph.threshold >= 0.0 && graph.threshold < 1.0)) throw ValidationError("graph.threshold must be in [0, 1)");
  if (graph.min_overlap < 2) throw ValidationError("graph.min_overlap must be at least 2");
  if (graph.window && graph.window->empty()) throw ValidationError("graph.window is empty");
  if (sweep.taus.empty()) throw ValidationError("sweep.taus must not be empty");
  for (double t : sweep.taus) {
    if (!(t >= 0.0)) throw ValidationError("sweep.taus must be non-negative");
  }
  if (!(predict_threshold >= 0.0)) throw ValidationError("predict.threshold must be non-negative");
  if (!train_blocks.any()) throw ValidationError("train.blocks selects no feature block");
  if (ablation.empty()) throw ValidationError("ablation.combinations must not be empty");
  for (const auto& b : ablation) {
    if (!b.any()) throw ValidationError("ablation combination selects no feature block");
  }
  embedding.validate();
  train.validate();
  synth.validate();
}

PipelineConfig load_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  PipelineConfig config;
  config.lexicon.seeds = default_keyword_seeds();
  config.ablation = default_ablation_combinations();

  Context ctx;
  if (file) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(file->string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError(std::string("cannot read config: ") + e.what());
    }
    ctx.base = fs::absolute(*file).parent_path();
    for (const auto& [section, keys] : tree) {
      if (keys.empty() && !keys.data().empty()) {
        throw ValidationError("config key '" + section + "' is outside any section");
      }
      for (const auto& [key, value] : keys) apply(config, section + "." + key, value.data(), ctx);
    }
  } else {
    ctx.base = fs::current_path();
  }
  const fs::path config_base = ctx.base;

  ctx.base = fs::current_path();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError("override '" + o + "' is not key=value");
    apply(config, std::string(trim(std::string_view(o).substr(0, eq))),
          std::string(trim(std::string_view(o).substr(eq + 1))), ctx);
  }

  if (!ctx.explicit_keys.contains("paths.work_dir")) config.paths.work_dir = config_base / "work";
  const auto& wd = config.paths.work_dir;
  if (!ctx.explicit_keys.contains("paths.articles")) config.paths.articles = wd / "articles.jsonl";
  if (!ctx.explicit_keys.contains("paths.prices")) config.paths.prices = wd / "prices.csv";
  if (!ctx.explicit_keys.contains("paths.aliases")) config.paths.aliases = wd / "aliases.csv";
  if (!ctx.explicit_keys.contains("embedding.seed")) config.embedding.seed = config.seed;
  if (!ctx.explicit_keys.contains("train.seed")) config.train.seed = config.seed;
  if (!ctx.explicit_keys.contains("synth.seed")) config.synth.seed = config.seed;

  config.validate();
  return config;
}

std::string default_config_text() {
  const PipelineConfig c;
  const SyntheticConfig& s = c.synth;
  std::ostringstream out;
  out << "[run]\nseed = 1\n\n"
      << "[paths]\nwork_dir = work\n; articles = <work_dir>/articles.jsonl\n; prices = <work_dir>/prices.csv\n"
      << "; aliases = <work_dir>/aliases.csv\n; category_seeds =\n; abbreviations =\n\n"
      << "[dates]\ntrain_start = " << c.dates.train_start.to_string() << "\ntrain_end = "
      << c.dates.train_end.to_string() << "\nvalid_end = " << c.dates.valid_end.to_string() << "\n\n"
      << "[lexicon]\nkeywords = " << c.lexicon.keywords << "\ncategory_words = " << c.lexicon.category_words
      << "\nseeds = ";
  for (std::size_t i = 0; i < default_keyword_seeds().size(); ++i) out << (i ? "," : "") << default_keyword_seeds()[i];
  out << "\n\n[embedding]\ndimension = " << c.embedding.dimension << "\nwindow = " << c.embedding.window
      << "\nnegative = " << c.embedding.negative << "\nepochs = " << c.embedding.epochs
      << "\nlearning_rate = " << format_double(c.embedding.learning_rate) << "\nmin_count = " << c.embedding.min_count
      << "\n; seed = <run.seed>\n\n[train]\nhidden = ";
  for (std::size_t i = 0; i < c.train.hidden.size(); ++i) out << (i ? "," : "") << c.train.hidden[i];
  out << "\nlearning_rate = " << format_double(c.train.learning_rate) << "\nlr_decay = " << format_double(c.train.lr_decay)
      << "\ndecay_every = " << c.train.decay_every << "\nbatch_size = " << c.train.batch_size
      << "\nepochs = " << c.train.epochs << "\nl2 = " << format_double(c.train.l2) << "\npatience = " << c.train.patience
      << "\n; seed = <run.seed>\nblocks = " << c.train_blocks.name() << "\n\n"
      << "[graph]\nthreshold = " << format_double(c.graph.threshold) << "\nmin_overlap = " << c.graph.min_overlap
      << "\n; window = <train_start..train_end>\n\n[sweep]\ntaus = ";
  for (std::size_t i = 0; i < c.sweep.taus.size(); ++i) out << (i ? "," : "") << format_double(c.sweep.taus[i]);
  out << "\niterations = " << c.sweep.iterations << "\nclamp = false\n\n"
      << "[predict]\nthreshold = " << format_double(c.predict_threshold) << "\n\n[ablation]\ncombinations = ";
  const auto combos = default_ablation_combinations();
  for (std::size_t i = 0; i < combos.size(); ++i) out << (i ? "," : "") << combos[i].name();
  out << "\n\n[synth]\n; seed = <run.seed>\ntickers = " << s.tickers << "\ngroup_size = " << s.group_size
      << "\nstart = " << s.start.to_string() << "\nend = " << s.end.to_string() << "\nwarmup_days = " << s.warmup_days
      << "\nsamples_per_day = " << s.samples_per_day << "\nnoise = " << format_double(s.noise)
      << "\ncoupling = " << format_double(s.coupling) << "\nnegative_fraction = " << format_double(s.negative_fraction)
      << "\nidiosyncratic = " << format_double(s.idiosyncratic) << "\nmove_size = " << format_double(s.move_size)
      << "\nreversion = " << format_double(s.reversion) << "\nfiller_words = " << s.filler_words
      << "\nobject_probability = " << format_double(s.object_probability)
      << "\npair_probability = " << format_double(s.pair_probability)
      << "\ncategory_probability = " << format_double(s.category_probability)
      << "\nchatter_probability = " << format_double(s.chatter_probability) << "\n";
  return out.str();
}

}  // namespace newsmotion
