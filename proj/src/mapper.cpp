#include "mapperscope/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mapperscope/parallel.hpp"

namespace mapperscope {
namespace {

bool in_interval(double x, const Interval& iv, std::size_t index, bool half_open) {
  if (x > iv.second) return false;
  return (half_open && index > 0) ? x > iv.first : x >= iv.first;
}

Interval observed_range(const LensValues& lens, std::size_t axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < lens.rows; ++i) {
    lo = std::min(lo, lens.at(i, axis));
    hi = std::max(hi, lens.at(i, axis));
  }
  return {lo, hi};
}

// Per-axis candidate intervals for one value; exact tests against bounds.
void axis_hits(double x, const std::vector<Interval>& ivs, Interval range, bool half_open,
               std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t res = ivs.size();
  if (res == 1) {
    if (in_interval(x, ivs[0], 0, half_open)) out.push_back(0);
    return;
  }
  const double w = (range.second - range.first) / static_cast<double>(res);
  const double guess = std::floor((x - range.first) / w);
  const auto reach = static_cast<long long>(std::ceil((ivs[0].second - ivs[0].first) / w)) + 1;
  const long long center = static_cast<long long>(std::clamp(guess, -1.0, static_cast<double>(res)));
  const long long first = std::max<long long>(0, center - reach);
  const long long last = std::min<long long>(static_cast<long long>(res) - 1, center + reach);
  for (long long i = first; i <= last; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!in_interval(x, ivs[idx], idx, half_open)) continue;
    out.push_back(idx);
    if (half_open) return;
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Interval> axis_intervals(Interval range, std::size_t resolution, double gain) {
  if (resolution == 0) throw Error(ErrorCode::BadParams, "resolution must be >= 1");
  if (!(gain >= 1.0)) throw Error(ErrorCode::BadParams, "gain must be >= 1");
  const auto [lo, hi] = range;
  if (!(lo <= hi)) throw Error(ErrorCode::BadParams, "axis range has min > max");
  if (hi == lo) return {{lo - 0.5, hi + 0.5}};

  const double w = (hi - lo) / static_cast<double>(resolution);
  const double pad = (gain - 1.0) * w / 2.0;
  std::vector<Interval> out(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    out[i] = {lo + static_cast<double>(i) * w - pad, lo + static_cast<double>(i + 1) * w + pad};
  }
  // Rounding in lo + res * w must not leave the extremes uncovered.
  out.front().first = std::min(out.front().first, lo);
  out.back().second = std::max(out.back().second, hi);
  return out;
}

std::vector<CoverCell> build_cover(const LensValues& lens, std::size_t resolution, double gain) {
  CoverSpec spec{resolution, gain, {}};
  return build_cover(lens, spec);
}

std::vector<CoverCell> build_cover(const LensValues& lens, CoverSpec& spec) {
  const std::size_t k = lens.k;
  if (spec.ranges.empty()) {
    for (std::size_t a = 0; a < k; ++a) spec.ranges.push_back(observed_range(lens, a));
  } else if (spec.ranges.size() != k) {
    throw Error(ErrorCode::DimensionMismatch, "cover ranges do not match lens dimension");
  } else {
    for (std::size_t a = 0; a < k; ++a) {
      const auto obs = observed_range(lens, a);
      if (obs.first < spec.ranges[a].first || obs.second > spec.ranges[a].second) {
        throw Error(ErrorCode::BadParams, "lens values fall outside the cover range");
      }
    }
  }

  std::vector<std::vector<Interval>> axes(k);
  for (std::size_t a = 0; a < k; ++a) axes[a] = axis_intervals(spec.ranges[a], spec.resolution, spec.gain);
  const bool half_open = spec.gain == 1.0;

  std::map<std::vector<std::size_t>, std::vector<std::size_t>> cells;
  std::vector<std::vector<std::size_t>> hits(k);
  std::vector<std::size_t> key(k);
  for (std::size_t i = 0; i < lens.rows; ++i) {
    bool covered = true;
    for (std::size_t a = 0; a < k; ++a) {
      axis_hits(lens.at(i, a), axes[a], spec.ranges[a], half_open, hits[a]);
      covered = covered && !hits[a].empty();
    }
    if (!covered) continue;
    std::size_t combos = 1;
    for (const auto& h : hits) combos *= h.size();
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rem = c;
      for (std::size_t a = k; a-- > 0;) {
        key[a] = hits[a][rem % hits[a].size()];
        rem /= hits[a].size();
      }
      cells[key].push_back(i);
    }
  }

  std::vector<CoverCell> out;
  out.reserve(cells.size());
  for (auto& [idx, members] : cells) {
    CoverCell cell;
    cell.axis_indices = idx;
    for (std::size_t a = 0; a < k; ++a) cell.bounds.push_back(axes[a][idx[a]]);
    cell.members = std::move(members);
    out.push_back(std::move(cell));
  }
  return out;
}

double histogram_cut(std::span<const double> merge_distances, double diameter, std::size_t bins) {
  constexpr double kOneCluster = std::numeric_limits<double>::infinity();
  if (merge_distances.empty() || !(diameter > 0.0)) return kOneCluster;
  const double width = diameter / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  auto bin_of = [&](double v) {
    return std::min(static_cast<std::size_t>(std::max(v, 0.0) / width), bins - 1);
  };
  for (double v : merge_distances) ++counts[bin_of(v)];
  ++counts[bin_of(diameter)];

  // Leading empty bins are not gaps: the gap must follow occupied mass.
  std::size_t b = 0;
  while (b < bins && counts[b] == 0) ++b;
  for (; b < bins; ++b) {
    if (counts[b] == 0) return static_cast<double>(b) * width;
  }
  return kOneCluster;
}

std::vector<std::vector<std::size_t>> cluster_cell(std::span<const std::size_t> members, const FeatureMatrix& m,
                                                   const ColumnStats& stats, std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::BadParams, "bins must be >= 2");
  const std::size_t count = members.size();
  if (count == 0) return {};
  if (count == 1) return {{members[0]}};

  const CondensedDistances dist = pairwise_distances(members, m, stats);
  const double diameter = *std::max_element(dist.values().begin(), dist.values().end());

  // Prim's MST on the dense distance matrix gives the single-linkage merges.
  std::vector<double> best(count, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> link(count, 0);
  std::vector<bool> done(count, false);
  struct MstEdge { std::size_t u, v; double w; };
  std::vector<MstEdge> mst;
  std::size_t cur = 0;
  done[0] = true;
  for (std::size_t step = 1; step < count; ++step) {
    std::size_t next = count;
    for (std::size_t v = 0; v < count; ++v) {
      if (done[v]) continue;
      const double dv = dist.at(cur, v);
      if (dv < best[v]) {
        best[v] = dv;
        link[v] = cur;
      }
      if (next == count || best[v] < best[next]) next = v;
    }
    done[next] = true;
    mst.push_back({link[next], next, best[next]});
    cur = next;
  }

  std::vector<double> merges;
  for (const auto& e : mst) merges.push_back(e.w);
  const double cut = histogram_cut(merges, diameter, bins);

  UnionFind uf(count);
  for (const auto& e : mst) {
    if (e.w < cut) uf.unite(e.u, e.v);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < count; ++i) groups[uf.find(i)].push_back(members[i]);

  std::vector<std::vector<std::size_t>> parts;
  for (auto& [_, g] : groups) {
    std::sort(g.begin(), g.end());
    parts.push_back(std::move(g));
  }
  std::sort(parts.begin(), parts.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() > y.size();
    return x.front() < y.front();
  });
  return parts;
}

std::vector<MapperEdge> nerve_edges(std::span<const MapperNode> nodes, std::size_t point_count) {
  std::vector<std::vector<std::size_t>> nodes_of(point_count);
  for (const auto& node : nodes) {
    for (std::size_t p : node.members) nodes_of.at(p).push_back(node.id);
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (const auto& list : nodes_of) {
    for (std::size_t x = 0; x < list.size(); ++x) {
      for (std::size_t y = x + 1; y < list.size(); ++y) {
        ++shared[{std::min(list[x], list[y]), std::max(list[x], list[y])}];
      }
    }
  }
  std::vector<MapperEdge> edges;
  edges.reserve(shared.size());
  for (const auto& [ab, cnt] : shared) edges.push_back({ab.first, ab.second, cnt});
  return edges;
}

MapperGraph build_mapper(const FeatureMatrix& m, const ColumnStats& stats, const LensValues& lens, CoverSpec spec,
                         std::size_t bins) {
  if (lens.rows != m.rows()) throw Error(ErrorCode::DimensionMismatch, "lens rows do not match matrix rows");
  const std::vector<CoverCell> cells = build_cover(lens, spec);

  std::vector<std::vector<std::vector<std::size_t>>> parts(cells.size());
  parallel_for(0, cells.size(), [&](std::size_t c) { parts[c] = cluster_cell(cells[c].members, m, stats, bins); });

  MapperGraph graph;
  graph.point_count = m.rows();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto& members : parts[c]) {
      graph.nodes.push_back({graph.nodes.size(), cells[c].axis_indices, std::move(members)});
    }
  }
  graph.edges = nerve_edges(graph.nodes, graph.point_count);
  graph.params.cover = std::move(spec);
  graph.params.bins = bins;
  graph.params.lens_dims = lens.k;
  return graph;
}

MapperGraph build_mapper(const Dataset& ds, const LensValues& lens, const CoverSpec& spec, std::size_t bins) {
  return build_mapper(ds.matrix, column_stats(ds.matrix), lens, spec, bins);
}

}  // namespace mapperscope
