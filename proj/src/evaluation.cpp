#include "newsmotion/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include <spdlog/spdlog.h>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

double error_rate(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size()) throw ValidationError("prediction/truth length mismatch");
  if (predictions.empty()) throw ValidationError("error rate of an empty set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) wrong += predictions[i] != truths[i];
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

double accuracy(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size()) throw ValidationError("prediction/truth length mismatch");
  if (predictions.empty()) throw ValidationError("accuracy of an empty set");
  std::size_t right = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) right += predictions[i] == truths[i];
  return static_cast<double>(right) / static_cast<double>(predictions.size());
}

std::vector<BlockSet> default_ablation_combinations() {
  return {
      BlockSet{true, false, false, false}, BlockSet{true, true, false, false},
      BlockSet{true, true, true, false},   BlockSet{true, true, false, true},
      BlockSet{true, false, true, false},  BlockSet{true, false, false, true},
      BlockSet{true, false, true, true},   BlockSet{true, true, true, true},
  };
}

std::string AblationReport::to_csv() const {
  std::ostringstream out;
  out << "combination,error_rate,samples,status\n";
  for (const auto& r : rows) {
    out << r.combination << ',' << (r.error_rate ? format_double(*r.error_rate) : "n/a") << ','
        << r.samples << ',' << (r.error_rate ? "ok" : "failed") << '\n';
  }
  return out.str();
}

std::string AblationReport::to_text() const {
  std::size_t width = std::string("feature combination").size();
  for (const auto& r : rows) width = std::max(width, r.combination.size());
  std::ostringstream out;
  out << pad("feature combination", width) << "  error rate  samples\n";
  out << std::string(width, '-') << "  ----------  -------\n";
  for (const auto& r : rows) {
    const auto rate = r.error_rate ? fixed(100.0 * *r.error_rate, 2) + "%" : "failed";
    out << pad(r.combination, width) << "  " << pad_left(rate, 10) << "  "
        << pad_left(std::to_string(r.samples), 7);
    if (!r.error_rate) out << "  (" << r.failure << ")";
    out << '\n';
  }
  return out.str();
}

AblationReport run_ablation(const FeatureMatrix& train, const FeatureMatrix& validation,
                            const FeatureMatrix& test, std::span<const BlockSet> combinations,
                            const TrainConfig& config) {
  if (test.rows.empty()) throw ValidationError("ablation needs a non-empty test set");
  AblationReport report;
  std::vector<Label> truths;
  for (const auto& r : test.rows) truths.push_back(r.label);

  for (const auto& blocks : combinations) {
    AblationRow row{blocks.name(), std::nullopt, test.rows.size(), {}};
    try {
      const auto model = newsmotion::train(train.select(blocks), validation.select(blocks), config);
      const auto test_set = test.select(blocks);
      std::vector<Label> predicted;
      predicted.reserve(test_set.rows.size());
      for (const auto& r : test_set.rows) predicted.push_back(predict(model, r.values).label);
      row.error_rate = error_rate(predicted, truths);
      spdlog::info("ablation {}: test error {:.4f}", row.combination, *row.error_rate);
    } catch (const Error& e) {
      row.failure = e.what();
      spdlog::error("ablation {} failed: {}", row.combination, row.failure);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<DailyPredictions> predict_by_date(const MlpModel& model, const FeatureMatrix& rows) {
  std::map<Date, std::map<std::string, double>> grouped;
  for (const auto& r : rows.rows) {
    grouped[r.date][r.ticker] = predict(model, FeatureVector{rows.layout, r.values}).confidence;
  }
  std::vector<DailyPredictions> out;
  for (auto& [date, confidences] : grouped) out.push_back({date, std::move(confidences)});
  return out;
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "tau,accuracy,predicted_per_day,observed_per_day\n";
  for (const auto& r : rows) {
    out << format_double(r.tau) << ',' << (r.accuracy ? format_double(*r.accuracy) : "n/a") << ','
        << format_double(r.predicted_per_day) << ',' << format_double(r.observed_per_day) << '\n';
  }
  return out.str();
}

std::string SweepReport::to_text() const {
  std::ostringstream out;
  out << "  tau  accuracy  predicted/day  observed/day  evaluated\n";
  out << "-----  --------  -------------  ------------  ---------\n";
  for (const auto& r : rows) {
    out << pad_left(fixed(r.tau, 2), 5) << "  "
        << pad_left(r.accuracy ? fixed(100.0 * *r.accuracy, 2) + "%" : "n/a", 8) << "  "
        << pad_left(fixed(r.predicted_per_day, 2), 13) << "  "
        << pad_left(fixed(r.observed_per_day, 2), 12) << "  "
        << pad_left(std::to_string(r.evaluated), 9) << '\n';
  }
  out << "dates used: " << dates_used << ", skipped (no observed stock): " << dates_skipped << '\n';
  return out.str();
}

SweepReport run_propagation_sweep(std::span<const DailyPredictions> days,
                                  const CorrelationGraph& graph, const PriceTable& prices,
                                  std::span<const double> taus,
                                  const PropagationSettings& settings) {
  for (double tau : taus) {
    if (!(tau >= 0.0)) throw ValidationError("thresholds must be non-negative");
  }
  std::vector<std::size_t> emitted(taus.size(), 0), evaluated(taus.size(), 0), correct(taus.size(), 0);
  std::size_t observed_total = 0;
  SweepReport report;

  for (const auto& day : days) {
    const auto x = PredictionVector::from_observations(graph, day.confidences);
    const auto observed = static_cast<std::size_t>(std::count(x.observed.begin(), x.observed.end(), true));
    if (observed == 0) {
      ++report.dates_skipped;
      continue;
    }
    ++report.dates_used;
    observed_total += observed;
    const auto propagated = propagate(graph, x, settings.iterations, settings.clamp_observed);
    for (std::size_t t = 0; t < taus.size(); ++t) {
      const auto predictions = threshold_predictions(graph, propagated, taus[t]);
      emitted[t] += predictions.size();
      for (const auto& [ticker, p] : predictions) {
        const auto* series = prices.find(ticker);
        if (series == nullptr) continue;
        const auto truth = movement_label(*series, day.date);
        if (!truth) continue;
        ++evaluated[t];
        correct[t] += *truth == p.label;
      }
    }
  }

  const double used = static_cast<double>(report.dates_used);
  for (std::size_t t = 0; t < taus.size(); ++t) {
    SweepRow row;
    row.tau = taus[t];
    row.evaluated = evaluated[t];
    if (evaluated[t] > 0) {
      row.accuracy = static_cast<double>(correct[t]) / static_cast<double>(evaluated[t]);
    }
    row.predicted_per_day = used > 0 ? static_cast<double>(emitted[t]) / used : 0.0;
    row.observed_per_day = used > 0 ? static_cast<double>(observed_total) / used : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace newsmotion
