#include "mapperscope/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mapperscope/error.hpp"

namespace mapperscope {
namespace {

constexpr std::size_t kMagicSize = 4;
constexpr std::size_t kDimSize = 8;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int b = 3; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

// Shared by AMF1 and AMF3: magic, `ndims` u64 dims, then floats.
std::vector<std::uint64_t> decode_header(std::span<const std::uint8_t> bytes, std::string_view magic,
                                         std::size_t ndims) {
  if (bytes.size() < kMagicSize || std::memcmp(bytes.data(), magic.data(), kMagicSize) != 0) {
    throw Error(ErrorCode::BadMagic, "expected magic " + std::string(magic));
  }
  const std::size_t header = kMagicSize + kDimSize * ndims;
  if (bytes.size() < header) throw Error(ErrorCode::TruncatedPayload, "header shorter than " + std::to_string(header));
  std::vector<std::uint64_t> dims(ndims);
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    dims[k] = get_u64(bytes.data() + kMagicSize + kDimSize * k);
    if (dims[k] == 0) throw Error(ErrorCode::BadParams, "zero dimension in header");
    if (count > (std::uint64_t{1} << 61) / dims[k]) throw Error(ErrorCode::BadParams, "dimensions overflow");
    count *= dims[k];
  }
  if ((bytes.size() - header) / 4 < count) {
    throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(count) + " floats, found " +
                                                 std::to_string((bytes.size() - header) / 4));
  }
  if (bytes.size() - header != count * 4) {
    throw Error(ErrorCode::TruncatedPayload, "payload has trailing bytes");
  }
  return dims;
}

void check_finite(std::span<const float> values, std::size_t cols) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFiniteValue,
                  "row " + std::to_string(i / cols) + ", col " + std::to_string(i % cols));
    }
  }
}

ImageRecord parse_record(const nlohmann::json& obj, std::size_t line_no) {
  auto malformed = [line_no](const std::string& why) {
    return Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
  };
  if (!obj.is_object()) throw malformed("not a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (key != "image_id" && key != "image_path" && key != "true_label" && key != "predictions") {
      throw malformed("unexpected key '" + key + "'");
    }
  }
  ImageRecord rec;
  if (!obj.contains("image_id") || !obj["image_id"].is_string()) throw malformed("image_id must be a string");
  if (!obj.contains("true_label") || !obj["true_label"].is_string()) throw malformed("true_label must be a string");
  rec.image_id = obj["image_id"].get<std::string>();
  rec.true_label = obj["true_label"].get<std::string>();
  if (rec.image_id.empty()) throw malformed("image_id is empty");
  if (obj.contains("image_path")) {
    if (!obj["image_path"].is_string()) throw malformed("image_path must be a string");
    rec.image_path = obj["image_path"].get<std::string>();
  }
  if (!obj.contains("predictions") || !obj["predictions"].is_array() || obj["predictions"].empty()) {
    throw malformed("predictions must be a non-empty array");
  }
  for (const auto& p : obj["predictions"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_number()) {
      throw malformed("prediction must be [label, confidence]");
    }
    const double conf = p[1].get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) throw malformed("confidence outside [0,1]");
    rec.predictions.push_back({p[0].get<std::string>(), conf});
  }
  for (std::size_t k = 1; k < rec.predictions.size(); ++k) {
    if (rec.predictions[k].confidence > rec.predictions[k - 1].confidence) {
      throw Error(ErrorCode::UnsortedPredictions, "line " + std::to_string(line_no));
    }
  }
  return rec;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> values, std::string source_tag)
    : rows_(rows), cols_(cols), values_(std::move(values)), source_tag_(std::move(source_tag)) {
  if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::BadParams, "matrix needs at least one row and column");
  if (values_.size() != rows_ * cols_) throw Error(ErrorCode::BadParams, "value count does not match rows*cols");
  check_finite(values_, cols_);
}

bool ImageRecord::correct_within(std::size_t top_k) const {
  const std::size_t limit = std::min(top_k, predictions.size());
  return std::any_of(predictions.begin(), predictions.begin() + static_cast<std::ptrdiff_t>(limit),
                     [&](const Prediction& p) { return p.label == true_label; });
}

std::vector<std::uint8_t> encode_feature_matrix(const FeatureMatrix& m) {
  check_finite(m.values(), std::max<std::size_t>(m.cols(), 1));
  std::vector<std::uint8_t> out;
  out.reserve(kMagicSize + 2 * kDimSize + 4 * m.values().size());
  out.insert(out.end(), {'A', 'M', 'F', '1'});
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (float v : m.values()) put_f32(out, v);
  return out;
}

FeatureMatrix decode_feature_matrix(std::span<const std::uint8_t> bytes) {
  const auto dims = decode_header(bytes, "AMF1", 2);
  const std::uint8_t* payload = bytes.data() + kMagicSize + 2 * kDimSize;
  std::vector<float> values(dims[0] * dims[1]);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f32(payload + 4 * i);
  return FeatureMatrix(dims[0], dims[1], std::move(values));
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  FeatureMatrix m = decode_feature_matrix(bytes);
  return FeatureMatrix(m.rows(), m.cols(), std::vector<float>(m.values().begin(), m.values().end()),
                       path.stem().string());
}

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  write_file(path, encode_feature_matrix(m));
}

SpatialActivation load_spatial_activation(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const auto dims = decode_header(bytes, "AMF3", 3);
  SpatialActivation t;
  t.image_id = path.stem().string();
  t.height = dims[0];
  t.width = dims[1];
  t.channels = dims[2];
  const std::uint8_t* payload = bytes.data() + kMagicSize + 3 * kDimSize;
  t.values.resize(dims[0] * dims[1] * dims[2]);
  for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = get_f32(payload + 4 * i);
  check_finite(t.values, t.channels);
  return t;
}

void write_spatial_activation(const SpatialActivation& t, const std::filesystem::path& path) {
  if (t.height == 0 || t.width == 0 || t.channels == 0 || t.values.size() != t.height * t.width * t.channels) {
    throw Error(ErrorCode::BadParams, "tensor dims do not match value count");
  }
  check_finite(t.values, t.channels);
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'A', 'M', 'F', '3'});
  put_u64(out, t.height);
  put_u64(out, t.width);
  put_u64(out, t.channels);
  for (float v : t.values) put_f32(out, v);
  write_file(path, out);
}

std::vector<ImageRecord> parse_metadata(std::string_view text) {
  std::vector<ImageRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + e.what());
    }
    ImageRecord rec = parse_record(obj, line_no);
    if (!seen.insert(rec.image_id).second) throw Error(ErrorCode::DuplicateImageId, rec.image_id);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ImageRecord> load_metadata(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_metadata(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_metadata(std::span<const ImageRecord> records) {
  std::string out;
  for (const auto& rec : records) {
    nlohmann::json obj;
    obj["image_id"] = rec.image_id;
    if (!rec.image_path.empty()) obj["image_path"] = rec.image_path;
    obj["true_label"] = rec.true_label;
    obj["predictions"] = nlohmann::json::array();
    for (const auto& p : rec.predictions) obj["predictions"].push_back({p.label, p.confidence});
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_metadata(std::span<const ImageRecord> records, const std::filesystem::path& path) {
  const std::string text = format_metadata(records);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void validate_dataset(const Dataset& ds) {
  if (ds.matrix.rows() != ds.records.size()) {
    throw Error(ErrorCode::MisalignedDataset, std::to_string(ds.matrix.rows()) + " matrix rows vs " +
                                                  std::to_string(ds.records.size()) + " metadata records");
  }
  std::unordered_set<std::string> seen;
  for (const auto& rec : ds.records) {
    if (!seen.insert(rec.image_id).second) throw Error(ErrorCode::DuplicateImageId, rec.image_id);
    if (rec.predictions.empty()) throw Error(ErrorCode::MalformedLine, "record " + rec.image_id + " has no predictions");
  }
}

Dataset load_dataset(const std::string& prefix) {
  const std::filesystem::path matrix_path = prefix + ".amf";
  const std::filesystem::path meta_path = prefix + ".jsonl";
  if (!std::filesystem::exists(matrix_path)) throw Error(ErrorCode::MatrixMissing, matrix_path.string());
  if (!std::filesystem::exists(meta_path)) throw Error(ErrorCode::MetadataMissing, meta_path.string());
  Dataset ds{load_feature_matrix(matrix_path), load_metadata(meta_path)};
  validate_dataset(ds);
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& prefix) {
  validate_dataset(ds);
  write_feature_matrix(ds.matrix, prefix + ".amf");
  write_metadata(ds.records, prefix + ".jsonl");
}

}  // namespace mapperscope
