#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mapperscope/dataset.hpp"
#include "mapperscope/error.hpp"

namespace mapperscope {

/// Per-column population statistics (divisor n).
struct ColumnStats {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<bool> active;         // variances[j] > 0
  std::vector<double> inv_variance;  // 1/variances[j], or 0 for inactive columns

  std::size_t dims() const noexcept { return means.size(); }
};

ColumnStats column_stats(const FeatureMatrix& m);

namespace detail {
template <typename A, typename B>
double vne_squared(std::span<const A> x, std::span<const B> y, const ColumnStats& stats) {
  if (x.size() != stats.dims() || y.size() != stats.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match column stats");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = static_cast<double>(x[j]) - static_cast<double>(y[j]);
    acc += diff * diff * stats.inv_variance[j];
  }
  return acc;
}
}  // namespace detail

/// Variance-normalized Euclidean distance: sqrt(sum over active columns of
/// (x_j - y_j)^2 / var_j). Zero-variance columns are ignored.
inline double vne_distance(std::span<const float> x, std::span<const float> y, const ColumnStats& stats) {
  return std::sqrt(detail::vne_squared(x, y, stats));
}
inline double vne_distance(std::span<const float> x, std::span<const double> y, const ColumnStats& stats) {
  return std::sqrt(detail::vne_squared(x, y, stats));
}
inline double vne_distance(std::span<const double> x, std::span<const double> y, const ColumnStats& stats) {
  return std::sqrt(detail::vne_squared(x, y, stats));
}

/// Upper triangle (i < j) of a symmetric distance matrix over m points.
class CondensedDistances {
 public:
  CondensedDistances() = default;
  explicit CondensedDistances(std::size_t points) : points_(points), values_(points * (points ? points - 1 : 0) / 2) {}

  std::size_t points() const noexcept { return points_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * points_ - i * (i + 1) / 2 + (j - i - 1);
  }
  double at(std::size_t i, std::size_t j) const { return i == j ? 0.0 : values_[index(i, j)]; }
  double& at_mut(std::size_t i, std::size_t j) { return values_[index(i, j)]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t points_ = 0;
  std::vector<double> values_;
};

/// VNE distances among the given rows; parallel over rows, one writer per entry.
CondensedDistances pairwise_distances(std::span<const std::size_t> points, const FeatureMatrix& m,
                                      const ColumnStats& stats);

/// PCA lens: projections of mean-centered rows on the top-k principal axes.
struct LensValues {
  std::size_t rows = 0;
  std::size_t k = 0;
  std::vector<double> values;              // rows x k, row-major
  std::vector<double> explained_variance;  // k, non-increasing (covariance eigenvalues, divisor n)
  std::vector<double> components;          // k x d unit directions; zero row for a null component
  std::vector<double> means;               // d

  double at(std::size_t i, std::size_t axis) const { return values[i * k + axis]; }
  std::vector<double> column(std::size_t axis) const;
  /// Places a new point in lens space: (x - means) . components.
  std::vector<double> project(std::span<const float> x) const;
};

/// Solver knobs for the top-k eigenproblem of the Gram matrix.
struct PcaOptions {
  double tolerance = 1e-10;  // relative eigenvalue change between iterations
  std::size_t max_iterations = 10000;
  std::size_t oversample = 10;  // extra block columns beyond k
};

/// Computes principal components through the n x n Gram matrix of centered
/// rows, so cost is O(n^2 d) rather than O(d^3). Each component is signed so
/// its largest-magnitude loading is positive.
LensValues pca_lens(const FeatureMatrix& m, std::size_t k, const PcaOptions& options = {});

/// Plain lens from caller-supplied values, e.g. a precomputed filter.
LensValues lens_from_values(std::size_t rows, std::size_t k, std::vector<double> values);

}  // namespace mapperscope
