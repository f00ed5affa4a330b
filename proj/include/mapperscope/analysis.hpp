#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mapperscope/coloring.hpp"
#include "mapperscope/dataset.hpp"
#include "mapperscope/geometry.hpp"
#include "mapperscope/mapper.hpp"

namespace mapperscope {

/// A true label is problematic when it occurs at least `min_count` times and
/// its accuracy is strictly below `max_accuracy`.
struct ProblematicRule {
  std::size_t min_count = 3;
  double max_accuracy = 0.40;
  std::size_t top_k = 1;
};

struct LabelStat {
  std::string label;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct ProblematicLabels {
  std::vector<std::string> labels;  // sorted
  std::vector<bool> marks;          // per record
  std::vector<LabelStat> stats;     // every true label, sorted by label
};

ProblematicLabels problematic_labels(std::span<const ImageRecord> records, const ProblematicRule& rule = {});

using LabelCount = std::pair<std::string, std::size_t>;

struct ClusterReport {
  std::size_t cluster_id = 0;
  std::vector<std::size_t> node_ids;   // ascending
  std::vector<std::size_t> point_ids;  // ascending, deduplicated
  double mean_coloring_value = 0.0;    // unweighted mean over node_ids
  std::vector<LabelCount> dominant_true_labels;  // count desc, label asc
};

/// Connected components of the subgraph induced by nodes whose coloring is
/// >= threshold. Components smaller than `min_nodes` are dropped. Reports are
/// ordered by point count (desc) then smallest node id, and numbered in that
/// order. `records` is only used for dominant_true_labels and may be empty.
std::vector<ClusterReport> extract_problem_clusters(const MapperGraph& graph, const Coloring& coloring,
                                                    double threshold, std::size_t min_nodes,
                                                    std::span<const ImageRecord> records = {});

struct RoutingModel {
  std::vector<std::size_t> cluster_ids;
  std::vector<std::vector<double>> centroids;
  std::vector<double> radii;
  ColumnStats stats;

  std::size_t dims() const noexcept { return stats.dims(); }
};

RoutingModel build_routing(const FeatureMatrix& m, std::span<const ClusterReport> reports, const ColumnStats& stats);

struct RouteDecision {
  std::optional<std::size_t> cluster_id;  // empty means the default learner
  double distance = 0.0;                  // to the nearest centroid (0 with no clusters)
  double radius = 0.0;                    // of that nearest cluster
  std::optional<std::size_t> nearest;     // nearest cluster regardless of gating
  std::vector<double> distances;          // index-aligned with RoutingModel::cluster_ids
};

/// Nearest centroid under VNE; accepted when its distance is within
/// slack * radius. Ties resolve to the smallest cluster id.
RouteDecision route_point(std::span<const float> x, const RoutingModel& model, double slack = 1.0);

struct ClusterSummary {
  std::size_t cluster_id = 0;
  std::size_t size = 0;
  double mean_accuracy = 0.0;
  std::vector<LabelCount> top_true_labels;          // up to 5
  std::vector<LabelCount> top_mispredicted_labels;  // top-1 labels of misclassified members, up to 5
};

std::vector<ClusterSummary> cluster_summary(std::span<const ClusterReport> reports,
                                            std::span<const ImageRecord> records, std::size_t top_k = 1);
std::string format_summary(std::span<const ClusterSummary> summary);

}  // namespace mapperscope
