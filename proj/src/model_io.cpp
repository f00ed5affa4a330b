#include "mapperscope/model_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "mapperscope/error.hpp"

namespace mapperscope {
namespace {

Error malformed(const std::string& why) { return Error(ErrorCode::MalformedModel, why); }

Json label_counts(const std::vector<LabelCount>& counts) {
  Json out = Json::array();
  for (const auto& [label, n] : counts) out.push_back(Json::array({label, n}));
  return out;
}

}  // namespace

Json graph_to_json(const MapperGraph& graph, const std::vector<Coloring>& colorings, const Json& extra_params) {
  Json params = Json::object();
  params["resolution"] = graph.params.cover.resolution;
  params["gain"] = graph.params.cover.gain;
  Json ranges = Json::array();
  for (const auto& [lo, hi] : graph.params.cover.ranges) ranges.push_back(Json::array({lo, hi}));
  params["ranges"] = ranges;
  params["bins"] = graph.params.bins;
  params["lens"] = graph.params.lens;
  params["lens_dims"] = graph.params.lens_dims;
  params["metric"] = graph.params.metric;
  params["point_count"] = graph.point_count;
  for (const auto& [key, value] : extra_params.items()) params[key] = value;

  Json nodes = Json::array();
  for (const auto& node : graph.nodes) {
    Json entry = Json::object();
    entry["id"] = node.id;
    entry["members"] = node.members;
    entry["size"] = node.members.size();
    nodes.push_back(std::move(entry));
  }
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    Json entry = Json::object();
    entry["a"] = e.a;
    entry["b"] = e.b;
    entry["shared"] = e.shared;
    edges.push_back(std::move(entry));
  }
  Json colors = Json::object();
  for (const auto& c : colorings) colors[c.name] = c.node_values;

  Json doc = Json::object();
  doc["params"] = std::move(params);
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  doc["colorings"] = std::move(colors);
  return doc;
}

LoadedGraph graph_from_json(const Json& doc) {
  if (!doc.is_object()) throw malformed("model is not a JSON object");
  for (const char* key : {"params", "nodes", "edges", "colorings"}) {
    if (!doc.contains(key)) throw malformed(std::string("missing key '") + key + "'");
  }
  LoadedGraph out;
  out.params = doc["params"];
  try {
    const Json& params = doc["params"];
    out.graph.point_count = params.at("point_count").get<std::size_t>();
    out.graph.params.cover.resolution = params.at("resolution").get<std::size_t>();
    out.graph.params.cover.gain = params.at("gain").get<double>();
    for (const auto& r : params.at("ranges")) out.graph.params.cover.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    out.graph.params.bins = params.at("bins").get<std::size_t>();
    out.graph.params.lens = params.at("lens").get<std::string>();
    out.graph.params.lens_dims = params.at("lens_dims").get<std::size_t>();
    out.graph.params.metric = params.at("metric").get<std::string>();

    for (const auto& entry : doc["nodes"]) {
      MapperNode node;
      node.id = entry.at("id").get<std::size_t>();
      node.members = entry.at("members").get<std::vector<std::size_t>>();
      if (node.id != out.graph.nodes.size()) throw malformed("node ids must be 0..n-1 in order");
      if (node.members.empty()) throw malformed("node " + std::to_string(node.id) + " has no members");
      if (entry.at("size").get<std::size_t>() != node.members.size()) throw malformed("node size mismatch");
      for (std::size_t i = 0; i < node.members.size(); ++i) {
        if (node.members[i] >= out.graph.point_count) throw malformed("member index out of range");
        if (i > 0 && node.members[i] <= node.members[i - 1]) throw malformed("members must be strictly ascending");
      }
      out.graph.nodes.push_back(std::move(node));
    }
    for (const auto& entry : doc["edges"]) {
      out.graph.edges.push_back(
          {entry.at("a").get<std::size_t>(), entry.at("b").get<std::size_t>(), entry.at("shared").get<std::size_t>()});
    }
    for (const auto& [name, values] : doc["colorings"].items()) {
      Coloring c{name, values.get<std::vector<double>>()};
      if (c.node_values.size() != out.graph.nodes.size()) throw malformed("coloring '" + name + "' length mismatch");
      for (double v : c.node_values) {
        if (!(v >= 0.0 && v <= 1.0)) throw malformed("coloring '" + name + "' outside [0,1]");
      }
      out.colorings.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw malformed(e.what());
  }
  if (out.graph.edges != nerve_edges(out.graph.nodes, out.graph.point_count)) {
    throw malformed("edge list does not match node intersections");
  }
  return out;
}

Json cluster_report_to_json(const ClusterReport& report) {
  Json j = Json::object();
  j["cluster_id"] = report.cluster_id;
  j["node_ids"] = report.node_ids;
  j["point_ids"] = report.point_ids;
  j["mean_coloring_value"] = report.mean_coloring_value;
  j["dominant_true_labels"] = label_counts(report.dominant_true_labels);
  return j;
}

Json summary_to_json(const ClusterSummary& s) {
  Json j = Json::object();
  j["cluster_id"] = s.cluster_id;
  j["size"] = s.size;
  j["mean_accuracy"] = s.mean_accuracy;
  j["top_true_labels"] = label_counts(s.top_true_labels);
  j["top_mispredicted_labels"] = label_counts(s.top_mispredicted_labels);
  return j;
}

Json route_to_json(const RouteDecision& decision) {
  Json j = Json::object();
  if (decision.cluster_id) {
    j["route"] = "cluster";
    j["cluster_id"] = *decision.cluster_id;
  } else {
    j["route"] = "default";
  }
  j["nearest_cluster"] = decision.nearest ? Json(*decision.nearest) : Json(nullptr);
  j["distance"] = decision.distance;
  j["radius"] = decision.radius;
  j["distances"] = decision.distances;
  return j;
}

Json record_to_json(const ImageRecord& record) {
  Json j = Json::object();
  j["image_id"] = record.image_id;
  j["image_path"] = record.image_path;
  j["true_label"] = record.true_label;
  Json preds = Json::array();
  for (const auto& p : record.predictions) preds.push_back(Json::array({p.label, p.confidence}));
  j["predictions"] = std::move(preds);
  j["correct_top1"] = record.correct_within(1);
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace mapperscope
