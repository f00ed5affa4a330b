#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mapperscope/dataset.hpp"
#include "mapperscope/geometry.hpp"

namespace mapperscope {

using Interval = std::pair<double, double>;

/// Cover parameters. `ranges` may be left empty, in which case each axis
/// spans the observed min/max of its lens column; build_cover records the
/// ranges it used.
struct CoverSpec {
  std::size_t resolution = 50;
  double gain = 3.0;
  std::vector<Interval> ranges;
};

struct CoverCell {
  std::vector<std::size_t> axis_indices;
  std::vector<Interval> bounds;
  std::vector<std::size_t> members;  // ascending row indices
};

/// Interval i of an axis over [lo, hi]: base width w = (hi - lo) / resolution,
/// widened by (gain - 1) * w / 2 on each side. Membership is closed; at gain 1
/// a point on a shared boundary belongs to the lower-index interval only.
/// A degenerate axis (lo == hi) has a single interval.
std::vector<Interval> axis_intervals(Interval range, std::size_t resolution, double gain);

/// Non-empty cells of the product cover in lexicographic axis-index order.
std::vector<CoverCell> build_cover(const LensValues& lens, std::size_t resolution, double gain);
std::vector<CoverCell> build_cover(const LensValues& lens, CoverSpec& spec);

/// Single-linkage clustering of `members` under the VNE metric, cut at the
/// first gap of the merge-distance histogram. Returns a partition of
/// `members`; each part is ascending and parts are ordered by size
/// (descending) then smallest member.
std::vector<std::vector<std::size_t>> cluster_cell(std::span<const std::size_t> members, const FeatureMatrix& m,
                                                   const ColumnStats& stats, std::size_t bins = 10);

/// Distance below which single-linkage merges are kept, given the merge
/// (MST) distances and cell diameter. Infinity means "one cluster".
double histogram_cut(std::span<const double> merge_distances, double diameter, std::size_t bins);

struct MapperNode {
  std::size_t id = 0;
  std::vector<std::size_t> cell;     // axis indices of the source cover cell
  std::vector<std::size_t> members;  // ascending, non-empty

  friend bool operator==(const MapperNode&, const MapperNode&) = default;
};

struct MapperEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  std::size_t shared = 0;

  friend bool operator==(const MapperEdge&, const MapperEdge&) = default;
};

struct MapperParams {
  CoverSpec cover;
  std::size_t bins = 10;
  std::size_t lens_dims = 2;
  std::string metric = "variance_normalized_euclidean";
  std::string lens = "pca";
};

struct MapperGraph {
  std::vector<MapperNode> nodes;
  std::vector<MapperEdge> edges;  // sorted by (a, b)
  MapperParams params;
  std::size_t point_count = 0;
};

/// Full Mapper construction. Cells are clustered in parallel; assembly is
/// sequential so node ids are (cell lexicographic, size desc, min member asc).
MapperGraph build_mapper(const FeatureMatrix& m, const ColumnStats& stats, const LensValues& lens, CoverSpec spec,
                         std::size_t bins = 10);
MapperGraph build_mapper(const Dataset& ds, const LensValues& lens, const CoverSpec& spec, std::size_t bins = 10);

/// Nerve edges for an arbitrary node list: one edge per intersecting pair.
std::vector<MapperEdge> nerve_edges(std::span<const MapperNode> nodes, std::size_t point_count);

}  // namespace mapperscope
