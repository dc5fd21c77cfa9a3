#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "newsmotion/data_ingest.hpp"
#include "newsmotion/sampling.hpp"

namespace newsmotion {

// Pearson product-moment coefficient, clamped to [-1, 1]. nullopt when the
// lengths differ, fewer than two points are given, or either side is constant.
std::optional<double> pearson(std::span<const double> u, std::span<const double> v);

struct GraphParams {
  double threshold = 0.8;        // keep |rho| strictly greater than this
  std::size_t min_overlap = 252; // common trading dates required for a pair
  DateRange window;

  friend bool operator==(const GraphParams&, const GraphParams&) = default;
};

struct Edge {
  std::size_t node = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected graph over tickers; neighbor lists are sorted by node index.
class CorrelationGraph {
 public:
  CorrelationGraph() = default;
  // `edges` holds (i, j, weight) with i != j, each unordered pair at most once.
  CorrelationGraph(std::vector<std::string> nodes, GraphParams params,
                   const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::optional<std::size_t> index_of(std::string_view ticker) const;
  std::span<const Edge> neighbors(std::size_t i) const { return adjacency_[i]; }
  std::optional<double> weight(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const noexcept { return edge_count_; }
  const GraphParams& params() const noexcept { return params_; }

  friend bool operator==(const CorrelationGraph& a, const CorrelationGraph& b) {
    return a.nodes_ == b.nodes_ && a.params_ == b.params_ && a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Edge>> adjacency_;
  std::size_t edge_count_ = 0;
  GraphParams params_;
};

// Nodes are the sorted, de-duplicated universe; every ticker must be in `prices`.
CorrelationGraph build_graph(const PriceTable& prices, std::span<const std::string> universe,
                             const GraphParams& params);

// CSV `ticker_i,ticker_j,weight` (ticker_i < ticker_j) preceded by comment lines
// recording the parameters and the node list.
void save_graph(const std::filesystem::path& path, const CorrelationGraph& graph);
CorrelationGraph load_graph(const std::filesystem::path& path);

// Signed confidences over graph nodes; unobserved entries are zero.
struct PredictionVector {
  std::vector<double> values;
  std::vector<bool> observed;

  static PredictionVector from_observations(const CorrelationGraph& graph,
                                            const std::map<std::string, double>& confidences);
};

// x' = A x per iteration. With clamp_observed the observed entries are reset to
// their inputs after every step. The result is clipped to [-1, 1] at the end.
PredictionVector propagate(const CorrelationGraph& graph, const PredictionVector& x,
                           std::size_t iterations = 1, bool clamp_observed = false);

struct PropagatedPrediction {
  Label label = Label::negative;
  double confidence = 0.0;

  friend bool operator==(const PropagatedPrediction&, const PropagatedPrediction&) = default;
};

// Unobserved nodes with x' != 0 and |x'| >= tau; up when x' > 0.
std::map<std::string, PropagatedPrediction> threshold_predictions(const CorrelationGraph& graph,
                                                                  const PredictionVector& x,
                                                                  double tau);

}  // namespace newsmotion
