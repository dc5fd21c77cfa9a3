// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "helpers.hpp"
#include "newsmotion/config.hpp"
#include "newsmotion/corr_graph.hpp"
#include "newsmotion/features.hpp"
#include "newsmotion/lexicon.hpp"
#include "newsmotion/mlp.hpp"
#include "newsmotion/pipeline.hpp"
#include "newsmotion/strings.hpp"

using namespace newsmotion;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Criterion 1 --------------------------------------------------------------

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const double eps = 1e-5;
  double worst = 0.0;
  std::size_t nets = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const std::vector<std::size_t> dims = trial % 2 ? std::vector<std::size_t>{12, 16, 16, 2}
                                                    : std::vector<std::size_t>{5, 7, 2};
    auto m = MlpModel::init(dims, 100 + trial);
    for (std::size_t l = 0; l < m.layers(); ++l)
      for (Eigen::Index i = 0; i < m.biases(l).size(); ++i) m.biases(l)(i) = 0.1 * g(rng);
    Batch batch{Eigen::MatrixXd(dims.front(), 6), {}};
    for (Eigen::Index c = 0; c < batch.inputs.cols(); ++c) {
      for (Eigen::Index r = 0; r < batch.inputs.rows(); ++r) batch.inputs(r, c) = g(rng);
      batch.labels.push_back(rng() % 2 ? Label::positive : Label::negative);
    }
    const double l2 = trial % 3 == 0 ? 1e-3 : 0.0;
    const auto analytic = loss_and_gradients(m, batch, l2).gradients;
    auto check = [&](double analytic_value, double& param) {
      const double saved = param;
      param = saved + eps;
      const double up = loss(m, batch, l2);
      param = saved - eps;
      const double down = loss(m, batch, l2);
      param = saved;
      const double fd = (up - down) / (2 * eps);
      const double scale = std::max({std::abs(analytic_value), std::abs(fd), 1e-7});
      worst = std::max(worst, std::abs(analytic_value - fd) / scale);
    };
    for (std::size_t l = 0; l < m.layers(); ++l) {
      for (Eigen::Index i = 0; i < m.weights(l).size(); ++i)
        check(analytic.weights[l].data()[i], m.weights(l).data()[i]);
      for (Eigen::Index i = 0; i < m.biases(l).size(); ++i) check(analytic.biases[l](i), m.biases(l)(i));
    }
    ++nets;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          std::to_string(nets) + " nets, max relative error " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// Criterion 2 --------------------------------------------------------------

Outcome softmax_loss() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-700.0, 700.0);
  double worst = 0.0;
  bool finite = true;
  for (int i = 0; i < 10000; ++i) {
    const double a = i < 4 ? (i % 2 ? 700.0 : -700.0) : u(rng);
    const double b = i < 4 ? (i / 2 ? 700.0 : -700.0) : u(rng);
    const auto p = softmax2(a, b);
    finite = finite && std::isfinite(p.up) && std::isfinite(p.down);
    worst = std::max(worst, std::abs(p.up + p.down - 1.0));
  }
  // A network whose output layer is all zeros emits logits (0, 0).
  auto m = MlpModel::init({3, 4, 2}, 1);
  m.weights(1).setZero();
  Batch batch{Eigen::MatrixXd::Random(3, 5), std::vector<Label>(5, Label::positive)};
  batch.labels[2] = Label::negative;
  const double loss_gap = std::abs(loss(m, batch) - std::log(2.0));
  return {finite && worst <= 1e-12 && loss_gap <= 1e-12,
          "max |sum-1| " + fmt(worst, 3) + ", |loss(0,0) - log 2| " + fmt(loss_gap, 3)};
}

// Criterion 3 --------------------------------------------------------------

double brute_force_ps(const std::vector<Sample>& samples, const std::string& word) {
  double pos = 0, neg = 0, df_pos = 0, df_neg = 0;
  for (const auto& s : samples) {
    bool found = false;
    for (const auto& sentence : s.sentences) {
      std::istringstream in(sentence.text);
      std::string w;
      while (in >> w) found = found || w == word;
    }
    const bool up = *s.label == Label::positive;
    (up ? pos : neg) += 1;
    if (found) (up ? df_pos : df_neg) += 1;
  }
  return std::log((df_pos + 1) * (neg + 1) / ((df_neg + 1) * (pos + 1)));
}

Outcome polarity_oracle() {
  std::mt19937_64 rng(31);
  const std::vector<std::string> pool{"surge", "rise", "shrink", "jump", "drop",
                                      "fall", "plunge", "gain", "slump", "rebound"};
  double worst = 0.0;
  bool antisymmetric = true;
  for (int corpus = 0; corpus < 50; ++corpus) {
    const std::size_t vocab = 1 + rng() % pool.size();
    // PS is only defined with both classes present, so the first two samples cover them.
    const std::size_t n = 2 + rng() % 29;
    std::vector<Sample> samples, inverted;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      for (std::size_t k = 0, len = 1 + rng() % 6; k < len; ++k) text += (k ? " " : "") + pool[rng() % vocab];
      const Date d = Date::from_ymd(2012, 1, 1).plus_days(int(i));
      const Label label = i < 2 ? (i == 0 ? Label::positive : Label::negative)
                                : (rng() % 2 ? Label::positive : Label::negative);
      samples.push_back(testutil::sample("T", d, {Sentence{text, d, {}}}, label));
      inverted.push_back(testutil::sample("T", d, {Sentence{text, d, {}}}, invert(label)));
    }
    for (std::size_t w = 0; w < vocab; ++w) {
      const double got = polarity_score(pool[w], samples);
      worst = std::max(worst, std::abs(got - brute_force_ps(samples, pool[w])));
      antisymmetric = antisymmetric && polarity_score(pool[w], inverted) == -got;
    }
  }
  return {worst <= 1e-12 && antisymmetric,
          "50 corpora, max |PS - oracle| " + fmt(worst, 3) + (antisymmetric ? ", inversion exact" : ", inversion NOT exact")};
}

// Criterion 4 --------------------------------------------------------------

Outcome pearson_graph() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> s(40), neg(40);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = g(rng);
    neg[i] = -s[i];
  }
  const double self = *pearson(s, s), anti = *pearson(s, neg);
  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  const double r = *pearson(a, b);

  std::vector<PriceSeries> series;
  for (const auto& [ticker, closes] : {std::pair{"A", a}, std::pair{"B", b}}) {
    std::vector<PricePoint> pts;
    for (std::size_t i = 0; i < closes.size(); ++i) pts.push_back({Date::from_ymd(2012, 1, 2).plus_days(int(i)), closes[i]});
    series.emplace_back(ticker, pts);
  }
  const DateRange window{Date::from_ymd(2012, 1, 1), Date::from_ymd(2012, 1, 31)};
  const PriceTable prices(series, window);
  const std::vector<std::string> universe{"A", "B"};
  const auto at_default = build_graph(prices, universe, {0.8, 4, window}).edge_count();
  const auto at_exact = build_graph(prices, universe, {r, 4, window}).edge_count();
  const bool pass = std::abs(self - 1.0) <= 1e-12 && std::abs(anti + 1.0) <= 1e-12 &&
                    std::abs(r - 0.8) <= 1e-12 && at_default == 0 && at_exact == 0;
  return {pass, "rho(s,s)-1 " + fmt(self - 1.0, 3) + ", rho(s,-s)+1 " + fmt(anti + 1.0, 3) + ", [1,3,2,4] " +
                    fmt(r, 17) + ", edges at threshold " + std::to_string(at_default + at_exact)};
}

// Criterion 5 --------------------------------------------------------------

Outcome propagation_oracle() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.4);
  const std::size_t n = 10;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back("S" + std::to_string(i));
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) {
          dense[i][j] = dense[j][i] = u(rng);
          edges.emplace_back(i, j, dense[i][j]);
        }
    const CorrelationGraph graph(nodes, {0.0, 2, {}}, edges);
    PredictionVector x{std::vector<double>(n, 0.0), std::vector<bool>(n, false)};
    for (std::size_t i = 0; i < n; ++i)
      if (coin(rng)) {
        x.values[i] = u(rng);
        x.observed[i] = true;
      }
    for (std::size_t iterations = 1; iterations <= 3; ++iterations) {
      for (bool clamp : {false, true}) {
        std::vector<double> want = x.values;
        for (std::size_t it = 0; it < iterations; ++it) {
          std::vector<double> next(n, 0.0);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[i] += dense[i][j] * want[j];
          if (clamp)
            for (std::size_t i = 0; i < n; ++i)
              if (x.observed[i]) next[i] = x.values[i];
          want = next;
        }
        const auto got = propagate(graph, x, iterations, clamp);
        for (std::size_t i = 0; i < n; ++i)
          worst = std::max(worst, std::abs(got.values[i] - std::clamp(want[i], -1.0, 1.0)));
      }
    }
  }
  return {worst <= 1e-12, "100 graphs x 3 iterations x clamp on/off, max deviation " + fmt(worst, 3)};
}

// Criterion 6 --------------------------------------------------------------

Outcome subject_example() {
  AliasTable aliases;
  aliases.add("Apple", "AAPL");
  aliases.add("Samsung", "SSNLF");
  aliases.add("Microsoft", "MSFT");
  const std::string text = "Apple slipped behind Samsung and Microsoft in a 2013 survey";
  const auto s = testutil::sentence(text, Date::from_ymd(2013, 1, 2), aliases);
  const auto kw = text.find("slipped");
  const bool apple = subject_of_keyword(s, "AAPL", kw) == Verdict::subject;
  const bool samsung = subject_of_keyword(s, "SSNLF", kw) == Verdict::not_subject;
  const bool microsoft = subject_of_keyword(s, "MSFT", kw) == Verdict::not_subject;
  return {apple && samsung && microsoft, std::string("Apple ") + (apple ? "kept" : "WRONG") + ", Samsung " +
                                             (samsung ? "flipped" : "WRONG") + ", Microsoft " +
                                             (microsoft ? "flipped" : "WRONG")};
}

// Criteria 7-10 share two full pipeline runs ---------------------------------

struct Run {
  testutil::TempDir dir;
  std::unique_ptr<Pipeline> pipeline;
  double seconds = 0.0;
  std::string error;
};

void run_pipeline(Run& run) {
  const auto t0 = Clock::now();
  try {
    const auto config = load_config(std::filesystem::path(NEWSMOTION_SOURCE_DIR) / "configs" / "synthetic.ini",
                                    {"paths.work_dir=" + run.dir.path().string()});
    run.pipeline = std::make_unique<Pipeline>(config);
    run.pipeline->run(Stage::synth);
    for (auto stage : pipeline_stages()) run.pipeline->run(stage);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = seconds_since(t0);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(testutil::read_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream fs(line);
    std::string f;
    while (std::getline(fs, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

Outcome ablation_separation(const Run& run) {
  if (!run.error.empty()) return {false, "pipeline failed: " + run.error};
  std::map<std::string, std::pair<double, std::size_t>> rows;
  for (const auto& r : read_csv(run.pipeline->artifact("ablation.csv")))
    if (r.size() >= 3 && r[1] != "n/a") rows[r[0]] = {std::stod(r[1]), std::stoul(r[2])};
  if (!rows.count("price") || !rows.count("price+BoK+PS+CT")) return {false, "ablation rows missing"};
  const double price = rows["price"].first, all = rows["price+BoK+PS+CT"].first;
  const std::size_t total = read_csv(run.pipeline->artifact("samples_train.jsonl")).size() + 1 +
                            read_csv(run.pipeline->artifact("samples_valid.jsonl")).size() + 1 +
                            read_csv(run.pipeline->artifact("samples_test.jsonl")).size() + 1;
  const bool pass = all <= 0.15 && price - all >= 0.10 && run.seconds < 300.0;
  return {pass, "error(all) " + fmt(all) + ", error(price) " + fmt(price) + ", gap " + fmt(price - all) + ", " +
                    std::to_string(total) + " labeled samples, " + std::to_string(rows["price"].second) +
                    " test, run " + fmt(run.seconds, 3) + " s"};
}

Outcome sweep_quality(const Run& run) {
  if (!run.error.empty()) return {false, "pipeline failed: " + run.error};
  const auto rows = read_csv(run.pipeline->artifact("sweep.csv"));
  std::optional<double> at08;
  double previous = 1e300;
  bool monotone = true;
  std::string per_day;
  for (const auto& r : rows) {
    const double tau = std::stod(r[0]), predicted = std::stod(r[2]);
    monotone = monotone && predicted <= previous;
    previous = predicted;
    per_day += (per_day.empty() ? "" : " ") + fmt(predicted, 3);
    if (std::abs(tau - 0.8) < 1e-9 && r[1] != "n/a") at08 = std::stod(r[1]);
  }
  const bool taus_ok = rows.size() == 6;
  const bool pass = taus_ok && monotone && at08 && *at08 >= 0.6;
  return {pass, "accuracy at tau=0.8 " + (at08 ? fmt(*at08) : std::string("n/a")) +
                    ", predicted/day over tau 0..1: " + per_day + (monotone ? " (non-increasing)" : " (NOT monotone)")};
}

Outcome determinism(const Run& a, const Run& b) {
  if (!a.error.empty() || !b.error.empty()) return {false, "pipeline failed: " + a.error + b.error};
  std::string mismatched;
  const std::vector<std::string> files{"model.bin",   "graph.csv", "ablation.csv",   "ablation.txt",
                                       "sweep.csv",   "sweep.txt", "predictions.csv"};
  for (const auto& f : files)
    if (testutil::read_file(a.pipeline->artifact(f)) != testutil::read_file(b.pipeline->artifact(f)))
      mismatched += " " + f;
  return {mismatched.empty(),
          mismatched.empty() ? std::to_string(files.size()) + " files byte-identical" : "differ:" + mismatched};
}

Outcome dimension_contract(const Run& run) {
  if (!run.error.empty()) return {false, "pipeline failed: " + run.error};
  const auto& cfg = run.pipeline->config();
  const auto model = load_model(run.pipeline->artifact("model.bin"));
  std::size_t rows = 0, bad = 0;
  bool layouts = true;
  for (const char* split : {"features_train.csv", "features_valid.csv", "features_test.csv"}) {
    const auto m = load_feature_matrix(run.pipeline->artifact(split));
    layouts = layouts && m.layout == model.layout();
    for (const auto& r : m.rows) {
      ++rows;
      if (r.values.size() != 2022) ++bad;
    }
  }
  const bool pass = cfg.lexicon.keywords == 1000 && model.layout().dimension() == 2022 &&
                    model.input_dim() == 2022 && layouts && bad == 0 && rows > 0;
  return {pass, std::to_string(rows) + " vectors, " + std::to_string(bad) + " not of length 2022, model layout " +
                    model.layout().to_string() + (layouts ? " matches" : " DIFFERS")};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient oracle", guarded(gradient_oracle));
  report(2, "softmax and loss", guarded(softmax_loss));
  report(3, "polarity score oracle", guarded(polarity_oracle));
  report(4, "pearson and graph threshold", guarded(pearson_graph));
  report(5, "propagation oracle", guarded(propagation_oracle));
  report(6, "subject heuristic", guarded(subject_example));

  Run first, second;
  run_pipeline(first);
  run_pipeline(second);
  report(7, "synthetic ablation", guarded([&] { return ablation_separation(first); }));
  report(8, "synthetic sweep", guarded([&] { return sweep_quality(first); }));
  report(9, "determinism", guarded([&] { return determinism(first, second); }));
  report(10, "feature dimension", guarded([&] { return dimension_contract(first); }));

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
