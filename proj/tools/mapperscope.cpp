// Command-line entry point: synth, build, analyze, heatmap, serve.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <sstream>

#include "mapperscope/dataset.hpp"
#include "mapperscope/error.hpp"
#include "mapperscope/heatmap.hpp"
#include "mapperscope/parallel.hpp"
#include "mapperscope/pipeline.hpp"
#include "mapperscope/png_io.hpp"
#include "mapperscope/service.hpp"

namespace ms = mapperscope;

namespace {

ms::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> rates;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      rates.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ms::Error(ms::ErrorCode::BadParams, "bad error rate '" + item + "'");
    }
  }
  return rates;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mapper models of classifier feature spaces"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->envname("MAPPERSCOPE_THREADS");

  // synth
  ms::SynthParams synth;
  std::string rates_text, synth_prefix;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--per-cluster", synth.per_cluster)->required();
  synth_cmd->add_option("--clusters", synth.clusters)->required();
  synth_cmd->add_option("--dims", synth.dims)->required();
  synth_cmd->add_option("--separation", synth.separation)->required();
  synth_cmd->add_option("--error-rates", rates_text, "comma-separated, one per cluster")->required();
  synth_cmd->add_option("--seed", synth.seed)->required();
  synth_cmd->add_option("--out-prefix", synth_prefix, "writes <prefix>.amf and <prefix>.jsonl")->required();

  // build
  ms::BuildOptions build;
  std::string build_dataset, build_out;
  auto* build_cmd = app.add_subcommand("build", "build a Mapper model");
  build_cmd->add_option("--dataset", build_dataset, "dataset prefix")->required();
  build_cmd->add_option("--resolution", build.resolution)->capture_default_str();
  build_cmd->add_option("--gain", build.gain)->capture_default_str();
  build_cmd->add_option("--bins", build.bins)->capture_default_str();
  build_cmd->add_option("--lens-dims", build.lens_dims)->capture_default_str();
  build_cmd->add_option("--top-k", build.top_k)->capture_default_str();
  build_cmd->add_option("--min-count", build.rule.min_count)->capture_default_str();
  build_cmd->add_option("--max-accuracy", build.rule.max_accuracy)->capture_default_str();
  build_cmd->add_option("--out", build_out)->required();

  // analyze
  ms::AnalyzeOptions analyze;
  std::string analyze_model_path, analyze_dataset, analyze_out;
  bool print_summary = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "extract problematic clusters");
  analyze_cmd->add_option("--model", analyze_model_path)->required();
  analyze_cmd->add_option("--dataset", analyze_dataset)->required();
  analyze_cmd->add_option("--min-count", analyze.rule.min_count)->capture_default_str();
  analyze_cmd->add_option("--max-accuracy", analyze.rule.max_accuracy)->capture_default_str();
  analyze_cmd->add_option("--top-k", analyze.rule.top_k)->capture_default_str();
  analyze_cmd->add_option("--threshold", analyze.threshold)->capture_default_str();
  analyze_cmd->add_option("--min-nodes", analyze.min_nodes)->capture_default_str();
  analyze_cmd->add_option("--out", analyze_out)->required();
  analyze_cmd->add_flag("--summary", print_summary, "print a text summary to stdout");

  // heatmap
  std::string tensor_path, image_path, heat_mode = "l2", heat_out;
  double heat_alpha = 0.6;
  auto* heat_cmd = app.add_subcommand("heatmap", "render an activation overlay");
  heat_cmd->add_option("--tensor", tensor_path)->required();
  heat_cmd->add_option("--image", image_path)->required();
  heat_cmd->add_option("--mode", heat_mode)->check(CLI::IsMember({"l2", "sum", "max"}))->capture_default_str();
  heat_cmd->add_option("--alpha", heat_alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  heat_cmd->add_option("--out", heat_out)->required();

  // serve
  ms::ServeOptions serve;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "serve a model over HTTP");
  serve_cmd->add_option("--model", serve.model_path)->required()->envname("MAPPERSCOPE_MODEL");
  serve_cmd->add_option("--dataset", serve.dataset_prefix)->required()->envname("MAPPERSCOPE_DATASET");
  serve_cmd->add_option("--clusters", serve.clusters_path)->envname("MAPPERSCOPE_CLUSTERS");
  serve_cmd->add_option("--images-root", serve.images_root)->envname("MAPPERSCOPE_IMAGES_ROOT");
  serve_cmd->add_option("--tensors", serve.tensors_dir)->envname("MAPPERSCOPE_TENSORS");
  serve_cmd->add_option("--static", serve.static_dir)->envname("MAPPERSCOPE_STATIC");
  serve_cmd->add_flag("--routing", serve.routing)->envname("MAPPERSCOPE_ROUTING");
  serve_cmd->add_option("--slack", serve.slack)->capture_default_str()->envname("MAPPERSCOPE_SLACK");
  serve_cmd->add_option("--host", host)->capture_default_str()->envname("MAPPERSCOPE_HOST");
  serve_cmd->add_option("--port", port)->capture_default_str()->envname("MAPPERSCOPE_PORT");

  CLI11_PARSE(app, argc, argv);
  ms::set_thread_count(threads);

  try {
    if (*synth_cmd) {
      synth.error_rates = parse_rates(rates_text);
      ms::write_dataset(ms::synth_dataset(synth).dataset, synth_prefix);
    } else if (*build_cmd) {
      const ms::Dataset ds = ms::load_dataset(build_dataset);
      ms::write_text_file(build_out, ms::dump_model(ms::build_model(ds, build)));
    } else if (*analyze_cmd) {
      const auto model = ms::graph_from_json(ms::Json::parse(ms::read_text_file(analyze_model_path)));
      const ms::Dataset ds = ms::load_dataset(analyze_dataset);
      const ms::Json doc = ms::analyze_model(model, ds, analyze);
      ms::write_text_file(analyze_out, doc.dump(2) + "\n");
      if (print_summary) {
        std::vector<ms::ClusterSummary> sums;
        for (const auto& s : doc["summary"]) {
          ms::ClusterSummary cs;
          cs.cluster_id = s["cluster_id"];
          cs.size = s["size"];
          cs.mean_accuracy = s["mean_accuracy"];
          for (const auto& lc : s["top_true_labels"]) cs.top_true_labels.emplace_back(lc[0], lc[1]);
          for (const auto& lc : s["top_mispredicted_labels"]) cs.top_mispredicted_labels.emplace_back(lc[0], lc[1]);
          sums.push_back(std::move(cs));
        }
        std::cout << ms::format_summary(sums);
      }
    } else if (*heat_cmd) {
      const auto tensor = ms::load_spatial_activation(tensor_path);
      const auto base = ms::read_png(image_path);
      const auto field = ms::heat_field(tensor, ms::parse_channel_reduce(heat_mode), base.height, base.width);
      ms::write_png(ms::render_overlay(field, base, heat_alpha), heat_out);
    } else if (*serve_cmd) {
      const auto bundle = ms::load_bundle(serve);
      ms::Service service(bundle);
      const int bound = service.bind(host, port);
      if (bound < 0) throw ms::Error(ms::ErrorCode::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on http://" << host << ":" << bound << "\n";
      service.listen();
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << ms::error_json(e).dump() << "\n";
    return 1;
  }
  return 0;
}
