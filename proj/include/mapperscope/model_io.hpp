#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mapperscope/analysis.hpp"
#include "mapperscope/coloring.hpp"
#include "mapperscope/mapper.hpp"

namespace mapperscope {

using Json = nlohmann::ordered_json;

/// Graph export: {"params", "nodes", "edges", "colorings"}. Node entries are
/// {"id", "members", "size"}; edges {"a", "b", "shared"}; each coloring is an
/// array index-aligned with "nodes". `extra_params` is merged into "params".
Json graph_to_json(const MapperGraph& graph, const std::vector<Coloring>& colorings, const Json& extra_params = Json::object());

struct LoadedGraph {
  MapperGraph graph;
  std::vector<Coloring> colorings;
  Json params;
};

/// Parses and validates a graph export; throws MalformedModel on any broken
/// cross-reference (ids, member ranges, nerve edges, coloring lengths).
LoadedGraph graph_from_json(const Json& doc);

Json cluster_report_to_json(const ClusterReport& report);
Json summary_to_json(const ClusterSummary& summary);
Json route_to_json(const RouteDecision& decision);
Json record_to_json(const ImageRecord& record);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mapperscope
