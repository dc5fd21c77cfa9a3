#include "newsmotion/corr_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "newsmotion/errors.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

std::optional<double> pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double cov = 0.0, vu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    cov += du * dv;
    vu += du * du;
    vv += dv * dv;
  }
  if (vu == 0.0 || vv == 0.0) return std::nullopt;
  return std::clamp(cov / std::sqrt(vu * vv), -1.0, 1.0);
}

CorrelationGraph::CorrelationGraph(
    std::vector<std::string> nodes, GraphParams params,
    const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()), params_(params) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], i).second) {
      throw ValidationError("duplicate graph node '" + nodes_[i] + "'");
    }
  }
  for (const auto& [i, j, w] : edges) {
    if (i >= nodes_.size() || j >= nodes_.size()) throw ValidationError("edge endpoint out of range");
    if (i == j) throw ValidationError("self-loop on '" + nodes_[i] + "'");
    if (!(std::abs(w) <= 1.0)) throw ValidationError("edge weight outside [-1, 1]");
    adjacency_[i].push_back({j, w});
    adjacency_[j].push_back({i, w});
    ++edge_count_;
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) { return a.node < b.node; });
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (list[k].node == list[k - 1].node) throw ValidationError("duplicate edge");
    }
  }
}

std::optional<std::size_t> CorrelationGraph::index_of(std::string_view ticker) const {
  const auto it = index_.find(std::string(ticker));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> CorrelationGraph::weight(std::size_t i, std::size_t j) const {
  const auto& list = adjacency_.at(i);
  const auto it = std::lower_bound(list.begin(), list.end(), j,
                                   [](const Edge& e, std::size_t n) { return e.node < n; });
  if (it == list.end() || it->node != j) return std::nullopt;
  return it->weight;
}

CorrelationGraph build_graph(const PriceTable& prices, std::span<const std::string> universe,
                             const GraphParams& params) {
  const std::set<std::string> unique(universe.begin(), universe.end());
  std::vector<std::string> nodes(unique.begin(), unique.end());
  std::vector<const PriceSeries*> series;
  for (const auto& t : nodes) series.push_back(&prices.at(t));

  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const auto [a, b] = align_series(*series[i], *series[j], params.window);
      if (a.size() < params.min_overlap) continue;
      const auto rho = pearson(a, b);
      if (rho && std::abs(*rho) > params.threshold) edges.emplace_back(i, j, *rho);
    }
  }
  return CorrelationGraph(std::move(nodes), params, edges);
}

void save_graph(const std::filesystem::path& path, const CorrelationGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& p = graph.params();
  out << "# threshold=" << format_double(p.threshold) << " window=" << p.window.to_string()
      << " min_overlap=" << p.min_overlap << '\n';
  out << "# nodes=";
  for (std::size_t i = 0; i < graph.size(); ++i) out << (i ? " " : "") << graph.nodes()[i];
  out << '\n';
  out << "ticker_i,ticker_j,weight\n";
  // Node order is lexicographic, so i < j by index means ticker_i < ticker_j.
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const auto& e : graph.neighbors(i)) {
      if (e.node <= i) continue;
      out << graph.nodes()[i] << ',' << graph.nodes()[e.node] << ',' << format_double(e.weight)
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

CorrelationGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  GraphParams params;
  std::vector<std::string> nodes;
  bool params_seen = false, nodes_seen = false, header_seen = false;
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  std::unordered_map<std::string, std::size_t> index;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    try {
      if (text.rfind("# nodes=", 0) == 0) {
        for (auto t : split(text.substr(8), ' ')) {
          if (t.empty()) continue;
          index.emplace(std::string(t), nodes.size());
          nodes.emplace_back(t);
        }
        nodes_seen = true;
      } else if (text.rfind("# ", 0) == 0) {
        for (auto kv : split(text.substr(2), ' ')) {
          const auto eq = kv.find('=');
          if (eq == std::string_view::npos) throw ParseError("malformed parameter '" + std::string(kv) + "'");
          const auto key = kv.substr(0, eq);
          const auto value = kv.substr(eq + 1);
          if (key == "threshold") {
            params.threshold = parse_double(value);
          } else if (key == "window") {
            params.window = DateRange::parse(value);
          } else if (key == "min_overlap") {
            params.min_overlap = parse_size(value);
          } else {
            throw ParseError("unknown parameter '" + std::string(key) + "'");
          }
        }
        params_seen = true;
      } else if (!header_seen) {
        if (text != "ticker_i,ticker_j,weight") throw ParseError("expected header 'ticker_i,ticker_j,weight'");
        header_seen = true;
      } else {
        const auto f = split(text, ',');
        if (f.size() != 3) throw ParseError("expected 3 fields");
        const auto i = index.find(std::string(f[0]));
        const auto j = index.find(std::string(f[1]));
        if (i == index.end() || j == index.end()) throw ParseError("edge references unknown ticker");
        if (!(f[0] < f[1])) throw ParseError("edge tickers must be in ascending order");
        edges.emplace_back(i->second, j->second, parse_double(f[2]));
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!params_seen || !nodes_seen || !header_seen) throw ParseError("incomplete graph file header");
  return CorrelationGraph(std::move(nodes), params, edges);
}

PredictionVector PredictionVector::from_observations(
    const CorrelationGraph& graph, const std::map<std::string, double>& confidences) {
  PredictionVector x{std::vector<double>(graph.size(), 0.0), std::vector<bool>(graph.size(), false)};
  for (const auto& [ticker, confidence] : confidences) {
    const auto i = graph.index_of(ticker);
    if (!i) continue;
    if (!(std::abs(confidence) <= 1.0)) throw ValidationError("confidence outside [-1, 1]");
    x.values[*i] = confidence;
    x.observed[*i] = true;
  }
  return x;
}

PredictionVector propagate(const CorrelationGraph& graph, const PredictionVector& x,
                           std::size_t iterations, bool clamp_observed) {
  if (x.values.size() != graph.size() || x.observed.size() != graph.size()) {
    throw ValidationError("prediction vector does not match graph size");
  }
  if (iterations == 0) return x;
  PredictionVector current = x;
  std::vector<double> next(graph.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < graph.size(); ++i) {
      double sum = 0.0;
      for (const auto& e : graph.neighbors(i)) sum += e.weight * current.values[e.node];
      next[i] = sum;
    }
    if (clamp_observed) {
      for (std::size_t i = 0; i < graph.size(); ++i) {
        if (x.observed[i]) next[i] = x.values[i];
      }
    }
    current.values.swap(next);
  }
  for (auto& v : current.values) v = std::clamp(v, -1.0, 1.0);
  return current;
}

std::map<std::string, PropagatedPrediction> threshold_predictions(const CorrelationGraph& graph,
                                                                  const PredictionVector& x,
                                                                  double tau) {
  if (tau < 0.0) throw ValidationError("threshold must be non-negative");
  std::map<std::string, PropagatedPrediction> out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (x.observed[i]) continue;
    const double v = x.values[i];
    if (v == 0.0 || std::abs(v) < tau) continue;
    out.emplace(graph.nodes()[i], PropagatedPrediction{v > 0.0 ? Label::positive : Label::negative, v});
  }
  return out;
}

}  // namespace newsmotion
