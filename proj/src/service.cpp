#include "mapperscope/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mapperscope/dataset.hpp"
#include "mapperscope/error.hpp"
#include "mapperscope/heatmap.hpp"
#include "mapperscope/pipeline.hpp"
#include "mapperscope/png_io.hpp"

namespace mapperscope {
namespace {

namespace fs = std::filesystem;

HttpReply json_reply(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

HttpReply error_reply(int status, const std::string& message) {
  Json body = Json::object();
  body["error"] = message;
  return json_reply(status, body);
}

const ImageRecord* find_record(const ModelBundle& bundle, const std::string& image_id) {
  for (const auto& rec : bundle.records) {
    if (rec.image_id == image_id) return &rec;
  }
  return nullptr;
}

// Resolves `relative` under `root`, refusing anything that escapes it.
std::optional<fs::path> contained_path(const std::string& root, const std::string& relative) {
  if (root.empty() || relative.empty()) return std::nullopt;
  std::error_code ec;
  const fs::path base = fs::weakly_canonical(root, ec);
  if (ec) return std::nullopt;
  const fs::path full = fs::weakly_canonical(base / relative, ec);
  if (ec) return std::nullopt;
  const auto [root_end, _] = std::mismatch(base.begin(), base.end(), full.begin(), full.end());
  if (root_end != base.end()) return std::nullopt;
  return full;
}

std::string content_type_for(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::shared_ptr<const ModelBundle> load_bundle(const ServeOptions& options) {
  auto bundle = std::make_shared<ModelBundle>();
  bundle->model_text = read_text_file(options.model_path);
  try {
    bundle->model = graph_from_json(Json::parse(bundle->model_text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedModel, e.what());
  }

  const std::string meta_path = options.dataset_prefix + ".jsonl";
  if (!fs::exists(meta_path)) throw Error(ErrorCode::MetadataMissing, meta_path);
  bundle->records = load_metadata(meta_path);
  if (bundle->records.size() != bundle->model.graph.point_count) {
    throw Error(ErrorCode::MisalignedDataset, "metadata record count does not match the model");
  }

  if (!options.clusters_path.empty()) {
    bundle->clusters_text = read_text_file(options.clusters_path);
    try {
      bundle->clusters = clusters_from_json(Json::parse(*bundle->clusters_text));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedModel, e.what());
    }
    for (const auto& c : bundle->clusters) {
      for (std::size_t v : c.node_ids) {
        if (v >= bundle->model.graph.nodes.size()) throw Error(ErrorCode::MalformedModel, "cluster references unknown node");
      }
      for (std::size_t p : c.point_ids) {
        if (p >= bundle->records.size()) throw Error(ErrorCode::MalformedModel, "cluster references unknown point");
      }
    }
  }

  if (options.routing) {
    if (options.clusters_path.empty()) throw Error(ErrorCode::BadParams, "routing needs a clusters file");
    const std::string matrix_path = options.dataset_prefix + ".amf";
    if (!fs::exists(matrix_path)) throw Error(ErrorCode::MatrixMissing, matrix_path);
    const FeatureMatrix m = load_feature_matrix(matrix_path);
    if (m.rows() != bundle->records.size()) throw Error(ErrorCode::MisalignedDataset, "matrix rows vs metadata");
    bundle->routing = build_routing(m, bundle->clusters, column_stats(m));
  }
  if (!(options.slack >= 1.0)) throw Error(ErrorCode::BadParams, "slack must be >= 1");
  bundle->slack = options.slack;
  bundle->images_root = options.images_root;
  bundle->tensors_dir = options.tensors_dir;
  bundle->static_dir = options.static_dir;
  return bundle;
}

HttpReply get_graph(const ModelBundle& bundle) { return {200, bundle.model_text, "application/json"}; }

HttpReply get_node(const ModelBundle& bundle, const std::string& id) {
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
  if (ec != std::errc() || ptr != id.data() + id.size()) return error_reply(400, "node id must be a non-negative integer");
  if (index >= bundle.model.graph.nodes.size()) return error_reply(404, "no node " + id);

  Json body = Json::object();
  body["id"] = index;
  Json members = Json::array();
  for (std::size_t p : bundle.model.graph.nodes[index].members) members.push_back(record_to_json(bundle.records[p]));
  body["members"] = std::move(members);
  return json_reply(200, body);
}

HttpReply get_clusters(const ModelBundle& bundle) {
  if (!bundle.clusters_text) return error_reply(404, "no clusters loaded");
  return {200, *bundle.clusters_text, "application/json"};
}

HttpReply get_image(const ModelBundle& bundle, const std::string& image_id) {
  const ImageRecord* rec = find_record(bundle, image_id);
  if (!rec) return error_reply(404, "unknown image " + image_id);
  const auto path = contained_path(bundle.images_root, rec->image_path);
  if (!path) return error_reply(404, "no image file for " + image_id);
  auto bytes = slurp(*path);
  if (!bytes) return error_reply(404, "image file missing for " + image_id);
  return {200, std::move(*bytes), content_type_for(*path)};
}

HttpReply get_heatmap(const ModelBundle& bundle, const std::string& image_id, const std::string& mode,
                      const std::string& alpha_text) {
  const ImageRecord* rec = find_record(bundle, image_id);
  if (!rec) return error_reply(404, "unknown image " + image_id);

  ChannelReduce reduce;
  double alpha = 0.6;
  try {
    reduce = parse_channel_reduce(mode.empty() ? "l2" : mode);
    if (!alpha_text.empty()) {
      std::size_t used = 0;
      alpha = std::stod(alpha_text, &used);
      if (used != alpha_text.size()) throw std::invalid_argument("alpha");
    }
  } catch (const std::exception&) {
    return error_reply(400, "bad mode or alpha");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) return error_reply(400, "alpha must lie in [0,1]");

  const auto tensor_path = contained_path(bundle.tensors_dir, image_id + ".amf3");
  if (!tensor_path || !fs::exists(*tensor_path)) return error_reply(404, "no activation tensor for " + image_id);
  const auto image_path = contained_path(bundle.images_root, rec->image_path);
  if (!image_path || !fs::exists(*image_path)) return error_reply(404, "no base image for " + image_id);

  try {
    const SpatialActivation tensor = load_spatial_activation(*tensor_path);
    const RgbaImage base = read_png(*image_path);
    const Grid field = heat_field(tensor, reduce, base.height, base.width);
    const auto png = encode_png(render_overlay(field, base, alpha));
    return {200, std::string(png.begin(), png.end()), "image/png"};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnsupportedImage) return error_reply(415, e.what());
    return error_reply(500, e.what());
  }
}

HttpReply post_route(const ModelBundle& bundle, const std::string& body) {
  if (!bundle.routing) return error_reply(404, "routing is not enabled");
  std::vector<float> x;
  try {
    const Json doc = Json::parse(body);
    const Json& values = doc.is_object() ? doc.at("features") : doc;
    if (!values.is_array()) return error_reply(400, "expected an array of numbers");
    for (const auto& v : values) {
      if (!v.is_number()) return error_reply(400, "expected an array of numbers");
      const auto f = v.get<double>();
      if (!std::isfinite(f)) return error_reply(400, "non-finite feature");
      x.push_back(static_cast<float>(f));
    }
  } catch (const nlohmann::json::exception&) {
    return error_reply(400, "body must be a JSON array or {\"features\": [...]}");
  }
  if (x.size() != bundle.routing->dims()) {
    return error_reply(400, "expected " + std::to_string(bundle.routing->dims()) + " features, got " +
                                std::to_string(x.size()));
  }
  return json_reply(200, route_to_json(route_point(x, *bundle.routing, bundle.slack)));
}

struct Service::Impl {
  std::shared_ptr<const ModelBundle> bundle;
  httplib::Server server;
};

Service::Service(std::shared_ptr<const ModelBundle> bundle) : impl_(std::make_unique<Impl>()) {
  impl_->bundle = std::move(bundle);
  const ModelBundle& b = *impl_->bundle;
  auto& srv = impl_->server;

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };

  srv.Get("/api/graph", [&b, send](const httplib::Request&, httplib::Response& res) { send(res, get_graph(b)); });
  srv.Get(R"(/api/nodes/([^/]+))", [&b, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_node(b, req.matches[1]));
  });
  srv.Get("/api/clusters", [&b, send](const httplib::Request&, httplib::Response& res) { send(res, get_clusters(b)); });
  srv.Get(R"(/api/images/([^/]+)/heatmap)", [&b, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_heatmap(b, req.matches[1], req.get_param_value("mode"), req.get_param_value("alpha")));
  });
  srv.Get(R"(/api/images/([^/]+))", [&b, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_image(b, req.matches[1]));
  });
  srv.Post("/api/route", [&b, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_route(b, req.body));
  });

  if (!b.static_dir.empty()) {
    srv.set_mount_point("/", b.static_dir);
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<!doctype html><title>mapperscope</title><p>API under <code>/api/</code>.</p>", "text/html");
    });
  }
}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace mapperscope
