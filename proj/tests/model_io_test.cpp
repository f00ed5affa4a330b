#include <gtest/gtest.h>

#include "mapperscope/error.hpp"
#include "mapperscope/model_io.hpp"
#include "mapperscope/pipeline.hpp"
#include "test_util.hpp"

using namespace mapperscope;

namespace {

Dataset small_dataset() {
  return synth_dataset({60, 3, 6, 12.0, {0.9, 0.1, 0.0}, 17}).dataset;
}

BuildOptions small_options() {
  BuildOptions o;
  o.resolution = 6;
  o.gain = 2;
  return o;
}

}  // namespace

TEST(ModelJson, RoundTrip) {
  const auto ds = small_dataset();
  const Json doc = build_model(ds, small_options());
  const auto loaded = graph_from_json(Json::parse(dump_model(doc)));
  EXPECT_EQ(loaded.graph.point_count, 180u);
  EXPECT_EQ(loaded.colorings.size(), 3u);
  EXPECT_EQ(loaded.colorings[0].name, "accuracy");
  EXPECT_EQ(loaded.colorings[1].name, "error_density");
  EXPECT_EQ(loaded.colorings[2].name, "problematic_density");
  EXPECT_EQ(graph_to_json(loaded.graph, loaded.colorings, Json::object()).dump(),
            [&] {
              Json d = doc;
              for (const char* k : {"top_k", "explained_variance", "source_tag", "feature_dims", "problematic_rule"})
                d["params"].erase(k);
              return d.dump();
            }());
  EXPECT_EQ(doc["params"]["resolution"], 6);
  EXPECT_EQ(doc["params"]["metric"], "variance_normalized_euclidean");
  EXPECT_EQ(doc["params"]["feature_dims"], 6);
}

TEST(ModelJson, AccuracyAndErrorAreComplementary) {
  const Json doc = build_model(small_dataset(), small_options());
  const auto& acc = doc["colorings"]["accuracy"];
  const auto& err = doc["colorings"]["error_density"];
  for (std::size_t i = 0; i < acc.size(); ++i) EXPECT_NEAR(acc[i].get<double>() + err[i].get<double>(), 1.0, 1e-12);
}

TEST(ModelJson, Deterministic) {
  const auto ds = small_dataset();
  EXPECT_EQ(dump_model(build_model(ds, small_options())), dump_model(build_model(ds, small_options())));
}

TEST(ModelJson, RejectsBrokenModels) {
  const Json doc = build_model(small_dataset(), small_options());
  auto expect_malformed = [](const Json& d) {
    try {
      graph_from_json(d);
      FAIL() << "accepted " << d.dump().substr(0, 80);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedModel);
    }
  };
  Json d = doc;
  d.erase("edges");
  expect_malformed(d);
  d = doc;
  d["nodes"][0]["members"].push_back(100000);
  expect_malformed(d);
  d = doc;
  d["edges"].push_back({{"a", 0}, {"b", 1}, {"shared", 99}});
  expect_malformed(d);
  d = doc;
  d["colorings"]["accuracy"].push_back(0.5);
  expect_malformed(d);
  d = doc;
  d["colorings"]["accuracy"][0] = 1.5;
  expect_malformed(d);
  d = doc;
  d["nodes"][0]["id"] = "zero";
  expect_malformed(d);
  expect_malformed(Json::array());
}

TEST(Analyze, FindsHighErrorCluster) {
  const auto ds = small_dataset();
  const auto loaded = graph_from_json(build_model(ds, small_options()));
  const Json doc = analyze_model(loaded, ds, AnalyzeOptions{});
  EXPECT_EQ(doc["problematic_labels"], Json::array({"class0"}));
  ASSERT_GE(doc["clusters"].size(), 1u);
  EXPECT_EQ(doc["clusters"][0]["dominant_true_labels"][0][0], "class0");
  const auto back = clusters_from_json(doc);
  EXPECT_EQ(back.size(), doc["clusters"].size());
  EXPECT_EQ(doc["summary"].size(), doc["clusters"].size());
  EXPECT_EQ(doc["rule"]["min_count"], 3);
}

TEST(Analyze, RejectsMismatchedDataset) {
  const auto ds = small_dataset();
  const auto loaded = graph_from_json(build_model(ds, small_options()));
  const auto other = synth_dataset({10, 1, 6, 5.0, {0.0}, 1}).dataset;
  try {
    analyze_model(loaded, other, AnalyzeOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MisalignedDataset);
  }
}

TEST(RouteJson, Shapes) {
  RouteDecision d;
  d.cluster_id = 2;
  d.nearest = 2;
  d.distance = 0.5;
  d.radius = 1.0;
  d.distances = {3, 2, 0.5};
  const Json j = route_to_json(d);
  EXPECT_EQ(j["route"], "cluster");
  EXPECT_EQ(j["cluster_id"], 2);
  d.cluster_id.reset();
  const Json k = route_to_json(d);
  EXPECT_EQ(k["route"], "default");
  EXPECT_FALSE(k.contains("cluster_id"));
}

TEST(ErrorJson, CarriesCode) {
  const Json j = error_json(Error(ErrorCode::MetadataMissing, "x.jsonl"));
  EXPECT_EQ(j["error"]["code"], "MetadataMissing");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("x.jsonl"), std::string::npos);
}
