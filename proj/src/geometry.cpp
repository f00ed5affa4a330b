#include "mapperscope/geometry.hpp"

#include <cmath>

#include "mapperscope/parallel.hpp"

namespace mapperscope {

ColumnStats column_stats(const FeatureMatrix& m) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  ColumnStats stats;
  stats.means.assign(d, 0.0);
  stats.variances.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < d; ++j) stats.means[j] += row[j];
  }
  for (double& mu : stats.means) mu /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - stats.means[j];
      stats.variances[j] += c * c;
    }
  }
  stats.active.resize(d);
  stats.inv_variance.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    stats.variances[j] /= static_cast<double>(n);
    stats.active[j] = stats.variances[j] > 0.0;
    stats.inv_variance[j] = stats.active[j] ? 1.0 / stats.variances[j] : 0.0;
  }
  return stats;
}

CondensedDistances pairwise_distances(std::span<const std::size_t> points, const FeatureMatrix& m,
                                      const ColumnStats& stats) {
  if (m.cols() != stats.dims()) throw Error(ErrorCode::DimensionMismatch, "matrix and stats disagree on columns");
  for (std::size_t p : points) {
    if (p >= m.rows()) throw Error(ErrorCode::BadParams, "row index out of range");
  }
  CondensedDistances out(points.size());
  parallel_for(0, points.size(), [&](std::size_t a) {
    const auto x = m.row(points[a]);
    for (std::size_t b = a + 1; b < points.size(); ++b) out.at_mut(a, b) = vne_distance(x, m.row(points[b]), stats);
  });
  return out;
}

}  // namespace mapperscope
