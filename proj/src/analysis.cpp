#include "mapperscope/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "mapperscope/error.hpp"

namespace mapperscope {
namespace {

std::vector<LabelCount> ranked(const std::map<std::string, std::size_t>& counts, std::size_t limit) {
  std::vector<LabelCount> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace

ProblematicLabels problematic_labels(std::span<const ImageRecord> records, const ProblematicRule& rule) {
  if (rule.min_count == 0) throw Error(ErrorCode::BadParams, "min_count must be >= 1");
  std::map<std::string, LabelStat> by_label;
  for (const auto& rec : records) {
    auto& s = by_label[rec.true_label];
    s.label = rec.true_label;
    ++s.count;
    if (rec.correct_within(rule.top_k)) ++s.correct;
  }

  ProblematicLabels out;
  std::set<std::string> bad;
  for (const auto& [label, s] : by_label) {
    out.stats.push_back(s);
    // Compare correct/count < max_accuracy without dividing.
    const bool rare = s.count < rule.min_count;
    const bool inaccurate = static_cast<double>(s.correct) < rule.max_accuracy * static_cast<double>(s.count);
    if (!rare && inaccurate) {
      bad.insert(label);
      out.labels.push_back(label);
    }
  }
  out.marks.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out.marks[i] = bad.contains(records[i].true_label);
  return out;
}

std::vector<ClusterReport> extract_problem_clusters(const MapperGraph& graph, const Coloring& coloring,
                                                    double threshold, std::size_t min_nodes,
                                                    std::span<const ImageRecord> records) {
  if (coloring.node_values.size() != graph.nodes.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coloring does not match node count");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::BadParams, "threshold must lie in [0,1]");
  if (min_nodes == 0) throw Error(ErrorCode::BadParams, "min_nodes must be >= 1");

  const std::size_t n = graph.nodes.size();
  std::vector<bool> hot(n);
  for (std::size_t v = 0; v < n; ++v) hot[v] = coloring.node_values[v] >= threshold;

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : graph.edges) {
    if (hot[e.a] && hot[e.b]) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  }

  std::vector<ClusterReport> reports;
  std::vector<bool> seen(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (!hot[start] || seen[start]) continue;
    ClusterReport rep;
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      rep.node_ids.push_back(v);
      for (std::size_t w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    if (rep.node_ids.size() < min_nodes) continue;
    std::sort(rep.node_ids.begin(), rep.node_ids.end());

    std::set<std::size_t> points;
    double sum = 0.0;
    for (std::size_t v : rep.node_ids) {
      points.insert(graph.nodes[v].members.begin(), graph.nodes[v].members.end());
      sum += coloring.node_values[v];
    }
    rep.point_ids.assign(points.begin(), points.end());
    rep.mean_coloring_value = sum / static_cast<double>(rep.node_ids.size());
    if (!records.empty()) {
      std::map<std::string, std::size_t> counts;
      for (std::size_t p : rep.point_ids) ++counts[records[p].true_label];
      rep.dominant_true_labels = ranked(counts, std::numeric_limits<std::size_t>::max());
    }
    reports.push_back(std::move(rep));
  }

  std::sort(reports.begin(), reports.end(), [](const ClusterReport& a, const ClusterReport& b) {
    if (a.point_ids.size() != b.point_ids.size()) return a.point_ids.size() > b.point_ids.size();
    return a.node_ids.front() < b.node_ids.front();
  });
  for (std::size_t c = 0; c < reports.size(); ++c) reports[c].cluster_id = c;
  return reports;
}

RoutingModel build_routing(const FeatureMatrix& m, std::span<const ClusterReport> reports, const ColumnStats& stats) {
  if (stats.dims() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "stats do not match matrix columns");
  RoutingModel model;
  model.stats = stats;
  const std::size_t d = m.cols();
  for (const auto& rep : reports) {
    if (rep.point_ids.empty()) throw Error(ErrorCode::BadParams, "cluster report without points");
    std::vector<double> centroid(d, 0.0);
    for (std::size_t p : rep.point_ids) {
      const auto row = m.row(p);
      for (std::size_t j = 0; j < d; ++j) centroid[j] += row[j];
    }
    for (double& c : centroid) c /= static_cast<double>(rep.point_ids.size());
    double radius = 0.0;
    for (std::size_t p : rep.point_ids) radius = std::max(radius, vne_distance(m.row(p), centroid, stats));
    model.cluster_ids.push_back(rep.cluster_id);
    model.centroids.push_back(std::move(centroid));
    model.radii.push_back(radius);
  }
  return model;
}

RouteDecision route_point(std::span<const float> x, const RoutingModel& model, double slack) {
  if (x.size() != model.dims()) throw Error(ErrorCode::DimensionMismatch, "query dimension does not match model");
  if (!(slack >= 1.0)) throw Error(ErrorCode::BadParams, "slack must be >= 1");
  RouteDecision out;
  std::size_t best = model.centroids.size();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double dist = vne_distance(x, model.centroids[c], model.stats);
    out.distances.push_back(dist);
    if (best == model.centroids.size() || dist < out.distances[best] ||
        (dist == out.distances[best] && model.cluster_ids[c] < model.cluster_ids[best])) {
      best = c;
    }
  }
  if (best == model.centroids.size()) return out;
  out.nearest = model.cluster_ids[best];
  out.distance = out.distances[best];
  out.radius = model.radii[best];
  if (out.distance <= slack * out.radius) out.cluster_id = model.cluster_ids[best];
  return out;
}

std::vector<ClusterSummary> cluster_summary(std::span<const ClusterReport> reports,
                                            std::span<const ImageRecord> records, std::size_t top_k) {
  std::vector<ClusterSummary> out;
  for (const auto& rep : reports) {
    ClusterSummary s;
    s.cluster_id = rep.cluster_id;
    s.size = rep.point_ids.size();
    std::map<std::string, std::size_t> truth, wrong;
    std::size_t correct = 0;
    for (std::size_t p : rep.point_ids) {
      const auto& rec = records[p];
      ++truth[rec.true_label];
      if (rec.correct_within(top_k)) {
        ++correct;
      } else {
        ++wrong[rec.top1()];
      }
    }
    s.mean_accuracy = s.size ? static_cast<double>(correct) / static_cast<double>(s.size) : 0.0;
    s.top_true_labels = ranked(truth, 5);
    s.top_mispredicted_labels = ranked(wrong, 5);
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary(std::span<const ClusterSummary> summary) {
  std::string out;
  char line[256];
  for (const auto& s : summary) {
    std::snprintf(line, sizeof line, "cluster %zu: %zu points, accuracy %.3f\n", s.cluster_id, s.size,
                  s.mean_accuracy);
    out += line;
    out += "  true labels:";
    for (const auto& [label, count] : s.top_true_labels) out += " " + label + "(" + std::to_string(count) + ")";
    out += "\n  mispredicted as:";
    for (const auto& [label, count] : s.top_mispredicted_labels) out += " " + label + "(" + std::to_string(count) + ")";
    out += "\n";
  }
  return out;
}

}  // namespace mapperscope
