#pragma once

#include <string>

#include "mapperscope/analysis.hpp"
#include "mapperscope/dataset.hpp"
#include "mapperscope/model_io.hpp"

namespace mapperscope {

struct BuildOptions {
  std::size_t resolution = 50;
  double gain = 3.0;
  std::size_t bins = 10;
  std::size_t lens_dims = 2;
  std::size_t top_k = 1;
  ProblematicRule rule;
};

/// column stats -> PCA lens -> cover -> Mapper -> colorings. The export
/// carries "accuracy", "error_density" and "problematic_density" colorings.
Json build_model(const Dataset& ds, const BuildOptions& options);

/// Canonical byte form of a model export (what `build` writes).
std::string dump_model(const Json& model);

struct AnalyzeOptions {
  ProblematicRule rule;
  double threshold = 0.5;
  std::size_t min_nodes = 2;
};

/// Problematic-label density over an existing graph, its hot components and a
/// per-cluster summary: {"rule", "problematic_labels", "clusters", "summary"}.
Json analyze_model(const LoadedGraph& model, const Dataset& ds, const AnalyzeOptions& options);

/// Cluster reports back from an analyze document.
std::vector<ClusterReport> clusters_from_json(const Json& doc);

/// Machine-readable error document for CLI failures.
Json error_json(const std::exception& e);

}  // namespace mapperscope
