#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mapperscope {

/// Dense n x d matrix of per-image features, row-major, float32.
/// Row i is aligned with metadata record i.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws BadParams on zero dims or size mismatch, NonFiniteValue on NaN/Inf.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> values, std::string source_tag = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::string& source_tag() const noexcept { return source_tag_; }

  std::span<const float> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  float at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
  std::string source_tag_;
};

struct Prediction {
  std::string label;
  double confidence = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct ImageRecord {
  std::string image_id;
  std::string image_path;  // empty when no image is available
  std::string true_label;
  std::vector<Prediction> predictions;  // confidence non-increasing

  const std::string& top1() const { return predictions.front().label; }
  /// True iff true_label is among the first min(top_k, |predictions|) labels.
  bool correct_within(std::size_t top_k) const;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Dataset {
  FeatureMatrix matrix;
  std::vector<ImageRecord> records;

  std::size_t size() const noexcept { return records.size(); }
};

/// H x W x C activation grid of one image; channel index varies fastest.
struct SpatialActivation {
  std::string image_id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> values;

  float at(std::size_t y, std::size_t x, std::size_t c) const { return values[(y * width + x) * channels + c]; }
};

// AMF1 / AMF3 binary containers.
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_feature_matrix(const FeatureMatrix& m);
FeatureMatrix decode_feature_matrix(std::span<const std::uint8_t> bytes);

SpatialActivation load_spatial_activation(const std::filesystem::path& path);
void write_spatial_activation(const SpatialActivation& t, const std::filesystem::path& path);

// JSON-lines metadata.
std::vector<ImageRecord> load_metadata(const std::filesystem::path& path);
std::vector<ImageRecord> parse_metadata(std::string_view text);
void write_metadata(std::span<const ImageRecord> records, const std::filesystem::path& path);
std::string format_metadata(std::span<const ImageRecord> records);

/// Loads `<prefix>.amf` and `<prefix>.jsonl` and checks row/record alignment.
/// Missing files raise MatrixMissing / MetadataMissing.
Dataset load_dataset(const std::string& prefix);
void write_dataset(const Dataset& ds, const std::string& prefix);
void validate_dataset(const Dataset& ds);

// Synthetic generator.
struct SynthParams {
  std::size_t per_cluster = 100;
  std::size_t clusters = 1;
  std::size_t dims = 10;
  double separation = 10.0;
  std::vector<double> error_rates;  // one per cluster
  std::uint64_t seed = 0;
};

/// Generated dataset plus the ground truth used to produce it.
struct SynthResult {
  Dataset dataset;
  std::vector<std::size_t> cluster_of;        // planted cluster per row
  std::vector<std::vector<double>> centers;   // one per cluster
};

/// Isotropic unit-variance Gaussian blobs. Cluster k has true label
/// "class<k>"; exactly round(error_rate[k] * per_cluster) of its records get a
/// wrong top-1 prediction, with the true label moved to rank 2..5.
SynthResult synth_dataset(const SynthParams& params);

/// Fresh draws from the blob of `cluster`, independent of the training rows.
std::vector<std::vector<float>> sample_cluster_points(const SynthResult& synth, std::size_t cluster,
                                                      std::size_t count, std::uint64_t seed);

}  // namespace mapperscope
