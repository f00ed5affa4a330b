#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mapperscope/analysis.hpp"
#include "mapperscope/model_io.hpp"

namespace mapperscope {

struct ServeOptions {
  std::string model_path;
  std::string dataset_prefix;  // metadata is read from <prefix>.jsonl
  std::string clusters_path;   // optional analyze output
  std::string images_root;
  std::string tensors_dir;     // optional; holds <image_id>.amf3
  std::string static_dir;      // optional dashboard assets
  bool routing = false;        // load <prefix>.amf to derive centroids
  double slack = 1.0;
};

/// Everything the server reads; immutable once loaded.
struct ModelBundle {
  std::string model_text;  // served verbatim on /api/graph
  LoadedGraph model;
  std::vector<ImageRecord> records;
  std::optional<std::string> clusters_text;
  std::vector<ClusterReport> clusters;
  std::optional<RoutingModel> routing;
  double slack = 1.0;
  std::string images_root;
  std::string tensors_dir;
  std::string static_dir;
};

/// Loads and cross-checks every input; throws on malformed or misaligned data.
std::shared_ptr<const ModelBundle> load_bundle(const ServeOptions& options);

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Endpoint logic, independent of the HTTP transport.
HttpReply get_graph(const ModelBundle& bundle);
HttpReply get_node(const ModelBundle& bundle, const std::string& id);
HttpReply get_clusters(const ModelBundle& bundle);
HttpReply get_image(const ModelBundle& bundle, const std::string& image_id);
HttpReply get_heatmap(const ModelBundle& bundle, const std::string& image_id, const std::string& mode,
                      const std::string& alpha);
HttpReply post_route(const ModelBundle& bundle, const std::string& body);

/// HTTP front end over a shared bundle. Handlers only read the bundle, so
/// concurrent requests need no locking.
class Service {
 public:
  explicit Service(std::shared_ptr<const ModelBundle> bundle);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to `port` (0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop() is called.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mapperscope
