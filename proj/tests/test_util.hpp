#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mapperscope/dataset.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mapperscope_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline mapperscope::FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<float> v(n * d);
  for (float& x : v) x = static_cast<float>(g(rng));
  return mapperscope::FeatureMatrix(n, d, std::move(v));
}

inline mapperscope::FeatureMatrix matrix(std::size_t n, std::size_t d, std::vector<float> v) {
  return mapperscope::FeatureMatrix(n, d, std::move(v));
}

inline mapperscope::ImageRecord record(std::string id, std::string truth, std::vector<std::string> predicted) {
  mapperscope::ImageRecord r;
  r.image_id = std::move(id);
  r.true_label = std::move(truth);
  double c = 0.9;
  for (auto& p : predicted) {
    r.predictions.push_back({std::move(p), c});
    c /= 2.0;
  }
  return r;
}

}  // namespace testutil
