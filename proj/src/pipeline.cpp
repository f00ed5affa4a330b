#include "mapperscope/pipeline.hpp"

#include "mapperscope/coloring.hpp"
#include "mapperscope/error.hpp"
#include "mapperscope/geometry.hpp"
#include "mapperscope/mapper.hpp"

namespace mapperscope {
namespace {

Json rule_to_json(const ProblematicRule& rule) {
  Json j = Json::object();
  j["min_count"] = rule.min_count;
  j["max_accuracy"] = rule.max_accuracy;
  j["top_k"] = rule.top_k;
  return j;
}

}  // namespace

Json build_model(const Dataset& ds, const BuildOptions& options) {
  validate_dataset(ds);
  const ColumnStats stats = column_stats(ds.matrix);
  const LensValues lens = pca_lens(ds.matrix, options.lens_dims);
  const MapperGraph graph =
      build_mapper(ds.matrix, stats, lens, CoverSpec{options.resolution, options.gain, {}}, options.bins);

  const auto flags = correctness_flags(ds, options.top_k);
  std::vector<bool> errors(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) errors[i] = !flags[i];
  const auto problematic = problematic_labels(ds.records, options.rule);

  std::vector<Coloring> colorings{accuracy_coloring(graph, flags), density_coloring(graph, errors, "error_density"),
                                  density_coloring(graph, problematic.marks, "problematic_density")};

  Json extra = Json::object();
  extra["top_k"] = options.top_k;
  extra["explained_variance"] = lens.explained_variance;
  extra["source_tag"] = ds.matrix.source_tag();
  extra["feature_dims"] = ds.matrix.cols();
  extra["problematic_rule"] = rule_to_json(options.rule);
  return graph_to_json(graph, colorings, extra);
}

std::string dump_model(const Json& model) { return model.dump() + "\n"; }

Json analyze_model(const LoadedGraph& model, const Dataset& ds, const AnalyzeOptions& options) {
  validate_dataset(ds);
  if (model.graph.point_count != ds.size()) {
    throw Error(ErrorCode::MisalignedDataset, "model has " + std::to_string(model.graph.point_count) +
                                                  " points, dataset has " + std::to_string(ds.size()));
  }
  const auto problematic = problematic_labels(ds.records, options.rule);
  const Coloring density = density_coloring(model.graph, problematic.marks, "problematic_density");
  const auto reports = extract_problem_clusters(model.graph, density, options.threshold, options.min_nodes, ds.records);
  const auto summary = cluster_summary(reports, ds.records, options.rule.top_k);

  Json rule = rule_to_json(options.rule);
  rule["threshold"] = options.threshold;
  rule["min_nodes"] = options.min_nodes;
  rule["coloring"] = density.name;

  Json doc = Json::object();
  doc["rule"] = std::move(rule);
  doc["problematic_labels"] = problematic.labels;
  Json clusters = Json::array();
  for (const auto& r : reports) clusters.push_back(cluster_report_to_json(r));
  doc["clusters"] = std::move(clusters);
  Json sums = Json::array();
  for (const auto& s : summary) sums.push_back(summary_to_json(s));
  doc["summary"] = std::move(sums);
  return doc;
}

std::vector<ClusterReport> clusters_from_json(const Json& doc) {
  std::vector<ClusterReport> out;
  try {
    for (const auto& c : doc.at("clusters")) {
      ClusterReport r;
      r.cluster_id = c.at("cluster_id").get<std::size_t>();
      r.node_ids = c.at("node_ids").get<std::vector<std::size_t>>();
      r.point_ids = c.at("point_ids").get<std::vector<std::size_t>>();
      r.mean_coloring_value = c.at("mean_coloring_value").get<double>();
      for (const auto& lc : c.at("dominant_true_labels")) {
        r.dominant_true_labels.emplace_back(lc.at(0).get<std::string>(), lc.at(1).get<std::size_t>());
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, std::string("clusters document: ") + e.what());
  }
  return out;
}

Json error_json(const std::exception& e) {
  Json err = Json::object();
  if (const auto* typed = dynamic_cast<const Error*>(&e)) {
    err["code"] = std::string(to_string(typed->code()));
  } else {
    err["code"] = "InternalError";
  }
  err["message"] = e.what();
  Json doc = Json::object();
  doc["error"] = std::move(err);
  return doc;
}

}  // namespace mapperscope
