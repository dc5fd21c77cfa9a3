#include "newsmotion/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "newsmotion/errors.hpp"
#include "newsmotion/random.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void SkipGramConfig::validate() const {
  if (dimension == 0 || window == 0 || negative == 0 || epochs == 0 || min_count == 0) {
    throw ValidationError("skip-gram sizes and counts must be positive");
  }
  if (!(learning_rate > 0.0)) throw ValidationError("skip-gram learning rate must be positive");
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                               std::size_t dimension, std::vector<double> values)
    : words_(std::move(words)),
      counts_(std::move(counts)),
      dimension_(dimension),
      values_(std::move(values)) {
  if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
  if (counts_.size() != words_.size() || values_.size() != words_.size() * dimension_) {
    throw ValidationError("embedding table shape mismatch");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw ValidationError("duplicate embedding word '" + words_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SkipGramResult train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                              const SkipGramConfig& config) {
  config.validate();

  std::map<std::string, std::uint64_t> frequency;
  for (const auto& s : sentences) {
    for (const auto& w : s) ++frequency[w];
  }
  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  for (auto& [w, c] : frequency) {
    if (c >= config.min_count) vocab.emplace_back(w, c);
  }
  if (vocab.empty()) {
    throw ValidationError("no word reaches min_count " + std::to_string(config.min_count));
  }
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    index.emplace(vocab[i].first, static_cast<std::uint32_t>(i));
    words.push_back(vocab[i].first);
    counts.push_back(vocab[i].second);
  }

  std::vector<std::vector<std::uint32_t>> corpus;
  std::size_t total_words = 0;
  for (const auto& s : sentences) {
    std::vector<std::uint32_t> ids;
    for (const auto& w : s) {
      if (const auto it = index.find(w); it != index.end()) ids.push_back(it->second);
    }
    total_words += ids.size();
    if (ids.size() >= 2) corpus.push_back(std::move(ids));
  }

  std::vector<double> cdf(words.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), 0.75);
    cdf[i] = acc;
  }
  for (auto& v : cdf) v /= acc;

  const std::size_t dim = config.dimension;
  Rng rng(config.seed);
  std::vector<double> input(words.size() * dim);
  for (auto& v : input) v = (uniform01(rng) - 0.5) / static_cast<double>(dim);
  std::vector<double> output(words.size() * dim, 0.0);
  std::vector<double> grad(dim);

  const double planned = static_cast<double>(config.epochs) * static_cast<double>(total_words) + 1.0;
  std::size_t processed = 0;
  std::vector<double> epoch_losses;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    for (const auto& ids : corpus) {
      for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        const double alpha = config.learning_rate *
                             std::max(1.0 - static_cast<double>(processed) / planned, 1e-4);
        ++processed;
        double* center = input.data() + ids[pos] * dim;
        const std::size_t lo = pos >= config.window ? pos - config.window : 0;
        const std::size_t hi = std::min(ids.size() - 1, pos + config.window);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t k = 0; k <= config.negative; ++k) {
            std::uint32_t target = ids[c];
            double truth = 1.0;
            if (k > 0) {
              const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform01(rng));
              target = static_cast<std::uint32_t>(
                  std::min<std::size_t>(std::distance(cdf.begin(), it), words.size() - 1));
              if (target == ids[c]) continue;
              truth = 0.0;
            }
            double* out = output.data() + target * dim;
            const double score = dot(center, out, dim);
            loss -= truth > 0.0 ? log_sigmoid(score) : log_sigmoid(-score);
            const double g = alpha * (truth - sigmoid(score));
            for (std::size_t d = 0; d < dim; ++d) {
              grad[d] += g * out[d];
              out[d] += g * center[d];
            }
          }
          for (std::size_t d = 0; d < dim; ++d) center[d] += grad[d];
          ++pairs;
        }
      }
    }
    epoch_losses.push_back(pairs > 0 ? loss / static_cast<double>(pairs) : 0.0);
  }

  return {EmbeddingTable(std::move(words), std::move(counts), dim, std::move(input)),
          std::move(epoch_losses)};
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header line", 1);
  const auto header = split(trim(line), ' ');
  if (header.size() != 2) throw ParseError("header must be '<vocab_size> <dimension>'", 1);
  std::size_t vocab_size = 0, dim = 0;
  try {
    vocab_size = parse_size(header[0]);
    dim = parse_size(header[1]);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), 1);
  }
  if (dim == 0) throw ParseError("dimension must be positive", 1);

  std::vector<std::string> words;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    std::vector<std::string_view> fields;
    for (auto f : split(text, ' ')) {
      if (!f.empty()) fields.push_back(f);
    }
    const std::string word(fields.front());
    if (fields.size() != dim + 1) {
      throw ParseError("word '" + word + "' has " + std::to_string(fields.size() - 1) +
                           " components, expected " + std::to_string(dim),
                       line_no);
    }
    for (std::size_t d = 1; d <= dim; ++d) {
      try {
        values.push_back(parse_double(fields[d]));
      } catch (const ParseError& e) {
        throw ParseError("word '" + word + "': " + e.what(), line_no);
      }
    }
    words.push_back(word);
  }
  if (words.size() != vocab_size) {
    throw ParseError("header declares " + std::to_string(vocab_size) + " words, file has " +
                     std::to_string(words.size()));
  }
  std::vector<std::uint64_t> counts(words.size(), 1);
  try {
    return EmbeddingTable(std::move(words), std::move(counts), dim, std::move(values));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << table.size() << ' ' << table.dimension() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.word(i);
    for (double v : table.vector(i)) out << ' ' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ValidationError("cosine: zero vector");
  // sqrt(uu * vv) is exact for u == v, so identical vectors give exactly 1.
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

std::vector<ScoredWord> rank_by_seed_similarity(const EmbeddingTable& table,
                                                std::span<const std::string> seeds) {
  std::vector<std::size_t> seed_rows;
  std::unordered_set<std::string> seed_words;
  for (const auto& s : seeds) {
    const auto row = table.find(s);
    if (!row) {
      spdlog::warn("seed word '{}' is not in the embedding vocabulary", s);
      continue;
    }
    if (seed_words.insert(s).second) seed_rows.push_back(*row);
  }
  if (seed_rows.empty()) throw ValidationError("no seed word is in the embedding vocabulary");

  const auto is_zero = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };

  std::vector<ScoredWord> ranked;
  ranked.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (seed_words.contains(table.word(i))) {
      ranked.push_back({table.word(i), 1.0, true});
      continue;
    }
    const auto v = table.vector(i);
    if (is_zero(v)) continue;
    double best = -1.0;
    for (const auto row : seed_rows) {
      const auto s = table.vector(row);
      if (is_zero(s)) continue;
      best = std::max(best, cosine(v, s));
    }
    ranked.push_back({table.word(i), best, false});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredWord& a, const ScoredWord& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  return ranked;
}

}  // namespace newsmotion
