#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "mapperscope/dataset.hpp"
#include "mapperscope/error.hpp"

namespace mapperscope {
namespace {

constexpr std::size_t kPredictionsPerRecord = 5;
constexpr std::size_t kDecoysPerCluster = 3;
constexpr int kCenterAttempts = 10000;

// Distribution helpers built directly on the engine output; the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string class_label(std::size_t k) { return "class" + std::to_string(k); }
std::string decoy_label(std::size_t k, std::size_t j) {
  return "decoy" + std::to_string(k) + "_" + std::to_string(j);
}

std::vector<std::vector<double>> place_centers(const SynthParams& p, Rng& rng) {
  std::vector<std::vector<double>> centers;
  int attempts = 0;
  while (centers.size() < p.clusters) {
    if (++attempts > kCenterAttempts) throw Error(ErrorCode::BadParams, "could not place separated centers");
    std::vector<double> c(p.dims);
    for (double& x : c) x = p.separation * (2.0 * rng.uniform() - 1.0);
    const bool far_enough = std::all_of(centers.begin(), centers.end(), [&](const auto& other) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < p.dims; ++j) d2 += (c[j] - other[j]) * (c[j] - other[j]);
      return std::sqrt(d2) >= p.separation;
    });
    if (far_enough) centers.push_back(std::move(c));
  }
  return centers;
}

// Five descending confidences summing to at most 1.
std::vector<double> draw_confidences(Rng& rng) {
  std::vector<double> raw(kPredictionsPerRecord);
  for (double& r : raw) r = 0.05 + rng.uniform();
  raw[0] += 1.5;
  std::sort(raw.begin(), raw.end(), std::greater<>());
  double total = 0.0;
  for (double r : raw) total += r;
  for (double& r : raw) r = std::round(r / total * 1e6) / 1e6;
  return raw;
}

}  // namespace

SynthResult synth_dataset(const SynthParams& p) {
  if (p.per_cluster == 0 || p.clusters == 0 || p.dims == 0) throw Error(ErrorCode::BadParams, "counts must be >= 1");
  if (!(p.separation > 0.0)) throw Error(ErrorCode::BadParams, "separation must be > 0");
  if (p.error_rates.size() != p.clusters) throw Error(ErrorCode::BadParams, "need one error rate per cluster");
  for (double r : p.error_rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::BadParams, "error rates must lie in [0,1]");
  }

  Rng rng(p.seed);
  SynthResult out;
  out.centers = place_centers(p, rng);

  const std::size_t n = p.per_cluster * p.clusters;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  // Generation index g belongs to cluster g / per_cluster and lands on row order[g].
  std::vector<float> values(n * p.dims);
  std::vector<ImageRecord> records(n);
  out.cluster_of.assign(n, 0);
  for (std::size_t k = 0; k < p.clusters; ++k) {
    std::vector<bool> wrong(p.per_cluster, false);
    const auto n_wrong = static_cast<std::size_t>(std::llround(p.error_rates[k] * static_cast<double>(p.per_cluster)));
    std::vector<std::size_t> pick(p.per_cluster);
    for (std::size_t i = 0; i < p.per_cluster; ++i) pick[i] = i;
    rng.shuffle(pick);
    for (std::size_t i = 0; i < n_wrong; ++i) wrong[pick[i]] = true;

    for (std::size_t i = 0; i < p.per_cluster; ++i) {
      const std::size_t row = order[k * p.per_cluster + i];
      out.cluster_of[row] = k;
      for (std::size_t j = 0; j < p.dims; ++j) {
        values[row * p.dims + j] = static_cast<float>(out.centers[k][j] + rng.normal());
      }

      std::vector<std::string> labels;
      for (std::size_t j = 0; j < kDecoysPerCluster; ++j) labels.push_back(decoy_label(k, j));
      rng.shuffle(labels);
      labels.push_back(class_label(p.clusters == 1 ? k + 1 : (k + 1) % p.clusters));
      const std::size_t true_rank = wrong[i] ? 1 + rng.below(kPredictionsPerRecord - 1) : 0;
      labels.insert(labels.begin() + static_cast<std::ptrdiff_t>(true_rank), class_label(k));

      const auto conf = draw_confidences(rng);
      ImageRecord& rec = records[row];
      char id[32];
      std::snprintf(id, sizeof id, "img%06zu", row);
      rec.image_id = id;
      rec.image_path = "images/" + rec.image_id + ".png";
      rec.true_label = class_label(k);
      for (std::size_t r = 0; r < kPredictionsPerRecord; ++r) rec.predictions.push_back({labels[r], conf[r]});
    }
  }

  out.dataset = Dataset{FeatureMatrix(n, p.dims, std::move(values), "synthetic"), std::move(records)};
  return out;
}

std::vector<std::vector<float>> sample_cluster_points(const SynthResult& synth, std::size_t cluster, std::size_t count,
                                                      std::uint64_t seed) {
  if (cluster >= synth.centers.size()) throw Error(ErrorCode::BadParams, "no such cluster");
  Rng rng(seed);
  const auto& center = synth.centers[cluster];
  std::vector<std::vector<float>> points(count, std::vector<float>(center.size()));
  for (auto& pt : points) {
    for (std::size_t j = 0; j < center.size(); ++j) pt[j] = static_cast<float>(center[j] + rng.normal());
  }
  return points;
}

}  // namespace mapperscope
