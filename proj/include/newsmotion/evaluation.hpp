#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newsmotion/corr_graph.hpp"
#include "newsmotion/features.hpp"
#include "newsmotion/mlp.hpp"

namespace newsmotion {

// Fraction of mismatches; throws on empty or unequal inputs.
double error_rate(std::span<const Label> predictions, std::span<const Label> truths);
double accuracy(std::span<const Label> predictions, std::span<const Label> truths);

// price, price+BoK, price+BoK+PS, price+BoK+CT, price+PS, price+CT, price+PS+CT,
// price+BoK+PS+CT
std::vector<BlockSet> default_ablation_combinations();

struct AblationRow {
  std::string combination;
  std::optional<double> error_rate;  // nullopt when training failed
  std::size_t samples = 0;
  std::string failure;
};

struct AblationReport {
  std::vector<AblationRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

// One model per combination, each trained with the same config and seed on the
// matching columns of `train`, selected on `validation`, scored on `test`.
AblationReport run_ablation(const FeatureMatrix& train, const FeatureMatrix& validation,
                            const FeatureMatrix& test, std::span<const BlockSet> combinations,
                            const TrainConfig& config);

// Classifier confidences (p_up - p_down) of the stocks observed on one date.
struct DailyPredictions {
  Date date;
  std::map<std::string, double> confidences;
};

// Groups model outputs on `rows` by sample date, in date order.
std::vector<DailyPredictions> predict_by_date(const MlpModel& model, const FeatureMatrix& rows);

struct PropagationSettings {
  std::size_t iterations = 1;
  bool clamp_observed = false;
};

struct SweepRow {
  double tau = 0.0;
  std::optional<double> accuracy;  // nullopt when nothing was emitted
  double predicted_per_day = 0.0;
  double observed_per_day = 0.0;
  std::size_t evaluated = 0;       // emitted predictions with a known next-day movement
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::size_t dates_used = 0;
  std::size_t dates_skipped = 0;  // dates without an observed graph node

  std::string to_csv() const;
  std::string to_text() const;
};

// Per date: observed confidences seed x, propagate, then for each tau compare
// the emitted unseen-stock predictions with the actual next-day movement.
SweepReport run_propagation_sweep(std::span<const DailyPredictions> days,
                                  const CorrelationGraph& graph, const PriceTable& prices,
                                  std::span<const double> taus,
                                  const PropagationSettings& settings = {});

}  // namespace newsmotion
