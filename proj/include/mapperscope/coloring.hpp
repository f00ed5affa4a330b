#pragma once

#include <string>
#include <vector>

#include "mapperscope/dataset.hpp"
#include "mapperscope/mapper.hpp"

namespace mapperscope {

/// Per-node value in [0,1], index-aligned with MapperGraph::nodes.
struct Coloring {
  std::string name;
  std::vector<double> node_values;
  std::string aggregation = "mean";
};

std::vector<bool> correctness_flags(const Dataset& ds, std::size_t top_k = 1);
std::vector<bool> correctness_flags(std::span<const ImageRecord> records, std::size_t top_k = 1);

/// Fraction of each node's members whose flag is set.
Coloring accuracy_coloring(const MapperGraph& graph, const std::vector<bool>& flags);
Coloring density_coloring(const MapperGraph& graph, const std::vector<bool>& marked, std::string name = "density");

/// Mean of an arbitrary per-point value in [0,1] over each node's members.
Coloring mean_coloring(const MapperGraph& graph, std::span<const double> point_values, std::string name);

}  // namespace mapperscope
