#include "mapperscope/coloring.hpp"

#include "mapperscope/error.hpp"

namespace mapperscope {

std::vector<bool> correctness_flags(std::span<const ImageRecord> records, std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorCode::BadParams, "top_k must be >= 1");
  std::vector<bool> flags(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) flags[i] = records[i].correct_within(top_k);
  return flags;
}

std::vector<bool> correctness_flags(const Dataset& ds, std::size_t top_k) {
  return correctness_flags(ds.records, top_k);
}

Coloring density_coloring(const MapperGraph& graph, const std::vector<bool>& marked, std::string name) {
  if (marked.size() != graph.point_count) {
    throw Error(ErrorCode::DimensionMismatch, "per-point marks do not match the graph's point count");
  }
  Coloring out{std::move(name), std::vector<double>(graph.nodes.size(), 0.0)};
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const auto& members = graph.nodes[n].members;
    std::size_t hits = 0;
    for (std::size_t p : members) hits += marked[p] ? 1 : 0;
    out.node_values[n] = static_cast<double>(hits) / static_cast<double>(members.size());
  }
  return out;
}

Coloring accuracy_coloring(const MapperGraph& graph, const std::vector<bool>& flags) {
  return density_coloring(graph, flags, "accuracy");
}

Coloring mean_coloring(const MapperGraph& graph, std::span<const double> point_values, std::string name) {
  if (point_values.size() != graph.point_count) {
    throw Error(ErrorCode::DimensionMismatch, "per-point values do not match the graph's point count");
  }
  for (double v : point_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::BadParams, "coloring values must lie in [0,1]");
  }
  Coloring out{std::move(name), std::vector<double>(graph.nodes.size(), 0.0)};
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    double sum = 0.0;
    for (std::size_t p : graph.nodes[n].members) sum += point_values[p];
    out.node_values[n] = sum / static_cast<double>(graph.nodes[n].members.size());
  }
  return out;
}

}  // namespace mapperscope
