#include "newsmotion/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"
#include "newsmotion/text.hpp"

namespace newsmotion {

std::array<double, kPriceFeatureSize> PriceFeature::flatten() const {
  std::array<double, kPriceFeatureSize> out{};
  std::copy(level.begin(), level.end(), out.begin());
  std::copy(delta.begin(), delta.end(), out.begin() + 5);
  std::copy(delta2.begin(), delta2.end(), out.begin() + 9);
  return out;
}

std::variant<PriceFeature, Skip> price_features(const PriceSeries& series, const NormStats& stats,
                                                Date target) {
  if (!(stats.std > 0.0)) throw ValidationError(series.ticker() + ": normalization std must be > 0");
  const auto obs = series.observations();
  const auto it = std::lower_bound(obs.begin(), obs.end(), target,
                                   [](const PricePoint& p, Date d) { return p.date < d; });
  const auto before = static_cast<std::size_t>(std::distance(obs.begin(), it));
  if (before < kPriceWindow) return Skip{"insufficient history"};

  PriceFeature f;
  for (std::size_t i = 0; i < kPriceWindow; ++i) {
    f.level[i] = stats.normalize(obs[before - kPriceWindow + i].close);
  }
  for (std::size_t i = 0; i < 4; ++i) f.delta[i] = f.level[i + 1] - f.level[i];
  for (std::size_t i = 0; i < 3; ++i) f.delta2[i] = f.delta[i + 1] - f.delta[i];
  return f;
}

Verdict NearestLeftMentionDetector::judge(const Sentence& sentence, std::string_view target,
                                          std::size_t keyword_offset) const {
  const Mention* nearest = nullptr;
  for (const auto& m : sentence.mentions) {
    if (m.offset >= keyword_offset) continue;
    if (nearest == nullptr || m.offset > nearest->offset) nearest = &m;
  }
  return nearest != nullptr && nearest->ticker == target ? Verdict::subject : Verdict::not_subject;
}

std::vector<double> bok_features(const Sample& sample, const KeywordLexicon& lexicon) {
  std::vector<double> tf(lexicon.size(), 0.0);
  for (const auto& sentence : sample.sentences) {
    for (const auto& token : tokenize(sentence.text)) {
      if (const auto k = lexicon.find(token)) tf[*k] += 1.0;
    }
  }
  for (std::size_t k = 0; k < tf.size(); ++k) tf[k] *= lexicon[k].idf;
  return tf;
}

std::vector<double> ps_features(const Sample& sample, const KeywordLexicon& lexicon,
                                const SubjectDetector& detector) {
  std::vector<double> signed_tf(lexicon.size(), 0.0);
  for (const auto& sentence : sample.sentences) {
    for (const auto& token : tokenize_with_offsets(sentence.text)) {
      const auto k = lexicon.find(token.text);
      if (!k) continue;
      const auto verdict = detector.judge(sentence, sample.ticker, token.offset);
      signed_tf[*k] += verdict == Verdict::subject ? 1.0 : -1.0;
    }
  }
  // (tf * idf) * PS so that an all-subject component equals bok * PS exactly.
  for (std::size_t k = 0; k < signed_tf.size(); ++k) {
    signed_tf[k] = (signed_tf[k] * lexicon[k].idf) * lexicon[k].ps;
  }
  return signed_tf;
}

std::vector<double> ct_features(const Sample& sample, const CategoryLexicon& categories) {
  std::vector<double> counts(categories.size(), 0.0);
  for (const auto& sentence : sample.sentences) {
    for (const auto& token : tokenize(sentence.text)) {
      for (const auto c : categories.categories_of(token)) counts[c] += 1.0;
    }
  }
  for (auto& n : counts) n = std::log(1.0 + n);
  return counts;
}

BlockSet BlockSet::parse(std::string_view text) {
  BlockSet b;
  for (auto part : split(text, '+')) {
    const auto name = to_lower(trim(part));
    if (name == "price") {
      b.price = true;
    } else if (name == "bok") {
      b.bok = true;
    } else if (name == "ps") {
      b.ps = true;
    } else if (name == "ct") {
      b.ct = true;
    } else {
      throw ValidationError("unknown feature block '" + std::string(trim(part)) + "'");
    }
  }
  return b;
}

std::string BlockSet::name() const {
  std::string out;
  const auto add = [&](bool on, const char* n) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += n;
  };
  add(price, "price");
  add(bok, "BoK");
  add(ps, "PS");
  add(ct, "CT");
  return out;
}

FeatureLayout::FeatureLayout(BlockSet blocks, std::size_t keywords, std::size_t categories)
    : blocks_(blocks),
      keywords_(blocks.bok || blocks.ps ? keywords : 0),
      categories_(blocks.ct ? categories : 0) {
  dimension_ = (blocks_.price ? kPriceFeatureSize : 0) + (blocks_.bok ? keywords_ : 0) +
               (blocks_.ps ? keywords_ : 0) + (blocks_.ct ? categories_ : 0);
}

FeatureLayout FeatureLayout::select(BlockSet blocks) const {
  if ((blocks.price && !blocks_.price) || (blocks.bok && !blocks_.bok) ||
      (blocks.ps && !blocks_.ps) || (blocks.ct && !blocks_.ct)) {
    throw ValidationError("layout " + to_string() + " lacks blocks of " + blocks.name());
  }
  return FeatureLayout(blocks, keywords_, categories_);
}

std::vector<std::size_t> FeatureLayout::columns_of(const FeatureLayout& sub) const {
  const auto checked = select(sub.blocks());
  if (!(checked == sub)) throw ValidationError("incompatible layout " + sub.to_string());
  std::vector<std::size_t> cols;
  const auto append = [&](bool on, std::size_t offset, std::size_t size) {
    if (!on) return;
    for (std::size_t i = 0; i < size; ++i) cols.push_back(offset + i);
  };
  const auto& b = sub.blocks();
  append(b.price, price_offset(), kPriceFeatureSize);
  append(b.bok, bok_offset(), keywords_);
  append(b.ps, ps_offset(), keywords_);
  append(b.ct, ct_offset(), categories_);
  return cols;
}

std::string FeatureLayout::to_string() const {
  std::string out;
  const auto add = [&](bool on, const char* n, std::size_t size) {
    if (!on) return;
    if (!out.empty()) out += ';';
    out += n;
    out += '=';
    out += std::to_string(size);
  };
  add(blocks_.price, "price", kPriceFeatureSize);
  add(blocks_.bok, "bok", keywords_);
  add(blocks_.ps, "ps", keywords_);
  add(blocks_.ct, "ct", categories_);
  return out;
}

FeatureLayout FeatureLayout::parse(std::string_view text) {
  BlockSet blocks;
  std::optional<std::size_t> keywords;
  std::size_t categories = 0;
  for (auto part : split(trim(text), ';')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed layout entry '" + std::string(part) + "'");
    const auto name = trim(part.substr(0, eq));
    const auto size = parse_size(part.substr(eq + 1));
    if (name == "price") {
      if (size != kPriceFeatureSize) throw ParseError("price block must have 12 entries");
      blocks.price = true;
    } else if (name == "bok" || name == "ps") {
      if (keywords && *keywords != size) throw ParseError("bok and ps sizes differ");
      keywords = size;
      (name == "bok" ? blocks.bok : blocks.ps) = true;
    } else if (name == "ct") {
      blocks.ct = true;
      categories = size;
    } else {
      throw ParseError("unknown layout block '" + std::string(name) + "'");
    }
  }
  return FeatureLayout(blocks, keywords.value_or(0), categories);
}

FeatureVector assemble(BlockSet blocks, const FeatureParts& parts) {
  if (!blocks.any()) throw ValidationError("no feature block enabled");
  const auto missing = [](const char* name) {
    return ValidationError(std::string("enabled block '") + name + "' was not computed");
  };
  if (blocks.price && !parts.price) throw missing("price");
  if (blocks.bok && !parts.bok) throw missing("BoK");
  if (blocks.ps && !parts.ps) throw missing("PS");
  if (blocks.ct && !parts.ct) throw missing("CT");
  if (blocks.bok && blocks.ps && parts.bok->size() != parts.ps->size()) {
    throw ValidationError("BoK and PS blocks differ in size");
  }
  const std::size_t k = blocks.bok ? parts.bok->size() : blocks.ps ? parts.ps->size() : 0;
  const std::size_t c = blocks.ct ? parts.ct->size() : 0;

  FeatureVector fv{FeatureLayout(blocks, k, c), {}};
  fv.values.reserve(fv.layout.dimension());
  if (blocks.price) fv.values.insert(fv.values.end(), parts.price->begin(), parts.price->end());
  if (blocks.bok) fv.values.insert(fv.values.end(), parts.bok->begin(), parts.bok->end());
  if (blocks.ps) fv.values.insert(fv.values.end(), parts.ps->begin(), parts.ps->end());
  if (blocks.ct) fv.values.insert(fv.values.end(), parts.ct->begin(), parts.ct->end());
  return fv;
}

FeatureMatrix FeatureMatrix::select(BlockSet blocks) const {
  FeatureMatrix out;
  out.layout = layout.select(blocks);
  const auto cols = layout.columns_of(out.layout);
  out.rows.reserve(rows.size());
  for (const auto& row : rows) {
    FeatureRow r{row.label, row.ticker, row.date, {}};
    r.values.reserve(cols.size());
    for (const auto c : cols) r.values.push_back(row.values[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

Featurizer::Featurizer(const PriceTable& prices, const KeywordLexicon* keywords,
                       const CategoryLexicon* categories, const SubjectDetector& detector,
                       BlockSet blocks)
    : prices_(prices),
      keywords_(keywords),
      categories_(categories),
      detector_(detector),
      blocks_(blocks) {
  if (!blocks.any()) throw ValidationError("no feature block enabled");
  if ((blocks.bok || blocks.ps) && keywords == nullptr) {
    throw ValidationError("BoK/PS features requested without a keyword lexicon");
  }
  if (blocks.ct && categories == nullptr) {
    throw ValidationError("CT features requested without a category lexicon");
  }
  layout_ = FeatureLayout(blocks, keywords ? keywords->size() : 0,
                          categories ? categories->size() : 0);
}

std::variant<FeatureVector, Skip> Featurizer::featurize(const Sample& sample) const {
  if (!sample.label) return Skip{"unlabeled"};
  FeatureParts parts;
  if (blocks_.price) {
    const auto* series = prices_.find(sample.ticker);
    if (series == nullptr) return Skip{"no price series"};
    const auto stats = prices_.stats(sample.ticker);
    if (!stats) return Skip{"unnormalizable ticker"};
    const auto target = series->first_after(sample.date);
    if (!target) return Skip{"no next close"};
    auto pf = price_features(*series, *stats, (*series)[*target].date);
    if (auto* skip = std::get_if<Skip>(&pf)) return *skip;
    parts.price = std::get<PriceFeature>(pf).flatten();
  }
  if (blocks_.bok) parts.bok = bok_features(sample, *keywords_);
  if (blocks_.ps) parts.ps = ps_features(sample, *keywords_, detector_);
  if (blocks_.ct) parts.ct = ct_features(sample, *categories_);
  return assemble(blocks_, parts);
}

FeaturizeResult Featurizer::run(std::span<const Sample> samples) const {
  FeaturizeResult result;
  result.matrix.layout = layout_;
  for (const auto& sample : samples) {
    auto fv = featurize(sample);
    if (auto* skip = std::get_if<Skip>(&fv)) {
      result.skipped.push_back({sample.ticker, sample.date, skip->reason});
      continue;
    }
    result.matrix.rows.push_back(
        {*sample.label, sample.ticker, sample.date, std::move(std::get<FeatureVector>(fv).values)});
  }
  return result;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# layout " << matrix.layout.to_string() << '\n';
  out << "label,ticker,date";
  for (std::size_t i = 0; i < matrix.layout.dimension(); ++i) out << ",f" << i;
  out << '\n';
  for (const auto& row : matrix.rows) {
    out << to_string(row.label) << ',' << row.ticker << ',' << row.date.to_string();
    for (double v : row.values) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  FeatureMatrix matrix;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# layout ", 0) != 0) {
    throw ParseError("missing '# layout' line", 1);
  }
  matrix.layout = FeatureLayout::parse(std::string_view(line).substr(9));
  if (!std::getline(in, line)) throw ParseError("missing column header", 2);
  std::size_t line_no = 2;
  const std::size_t dim = matrix.layout.dimension();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != dim + 3) {
      throw ParseError("expected " + std::to_string(dim + 3) + " fields, got " +
                           std::to_string(f.size()),
                       line_no);
    }
    try {
      FeatureRow row{parse_label(f[0]), std::string(f[1]), Date::parse(f[2]), {}};
      row.values.reserve(dim);
      for (std::size_t i = 3; i < f.size(); ++i) row.values.push_back(parse_double(f[i]));
      matrix.rows.push_back(std::move(row));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return matrix;
}

}  // namespace newsmotion
