#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "totopo/error.hpp"
#include "totopo/persistence.hpp"
#include "union_find.hpp"

namespace totopo {

std::vector<double> pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = cloud[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = cloud[j];
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
    }
  }
  return dist;
}

namespace {

struct Edge {
  double length;
  std::uint32_t i, j;  // i < j
};

// A cofacet of an edge, keyed for the filtration order (diameter, colex index).
struct Entry {
  double diameter;
  std::uint64_t id;
  bool operator<(const Entry& o) const { return diameter != o.diameter ? diameter < o.diameter : id < o.id; }
  bool operator==(const Entry& o) const { return id == o.id; }
};

std::uint64_t choose2(std::uint64_t n) { return n * (n - 1) / 2; }
std::uint64_t choose3(std::uint64_t n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }

// Colex index of the triangle {i, j, k}, i < j.
std::uint64_t triangle_id(std::uint32_t i, std::uint32_t j, std::uint32_t k) {
  if (k > j) return choose3(k) + choose2(j) + i;
  if (k > i) return choose3(j) + choose2(k) + i;
  return choose3(j) + choose2(i) + k;
}

using Column = std::vector<Entry>;

void add_column(Column& target, const Column& source, Column& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

}  // namespace

PersistenceDiagram rips_pd_from_distances(std::span<const double> dist, std::size_t n,
                                          const RipsOptions& options) {
  if (options.max_dim > 1) throw UnsupportedError("Rips persistence is implemented for dims 0 and 1 only");
  if (options.max_dim < 0) throw ConfigError("max_dim must be 0 or 1");
  if (n == 0) throw ShapeError("Rips persistence needs a nonempty point cloud");
  if (dist.size() != n * n) throw ShapeError("distance matrix must be n x n");

  double radius = 0.0;
  if (options.max_radius) {
    radius = *options.max_radius;
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("max_radius must be finite and nonnegative");
  } else {
    for (double d : dist) radius = std::max(radius, d);
  }

  PersistenceDiagram pd;
  pd.source = DiagramSource::rips;

  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double d = dist[i * n + j];
      if (d <= radius) edges.push_back({d, i, j});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.length != b.length) return a.length < b.length;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  // H0 by Kruskal. Death edges are exactly the pivots of the dimension-0
  // coboundary reduction, so their H1 columns are known to vanish.
  detail::UnionFind uf(n);
  std::vector<char> cleared(edges.size(), 0);
  std::size_t merges = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t a = uf.find(edges[e].i);
    const std::size_t b = uf.find(edges[e].j);
    if (a == b) continue;
    uf.unite(a, b);
    cleared[e] = 1;
    pd.points.push_back({0.0, edges[e].length, 0});
    ++merges;
  }
  for (std::size_t c = merges; c < n; ++c) pd.points.push_back({0.0, radius, 0});

  if (options.max_dim < 1 || n < 3) return pd;

  // H1: reduce coboundary columns of the surviving edges in reverse
  // filtration order. The pivot of a column is its earliest cofacet. Almost
  // every column is already reduced, so a column is only sorted and stored
  // when it takes part in an addition; otherwise its owner is rebuilt from
  // the edge on demand.
  auto coboundary = [&](const Edge& edge, Column& out) {
    out.clear();
    for (std::uint32_t k = 0; k < n; ++k) {
      if (k == edge.i || k == edge.j) continue;
      const double dik = dist[edge.i * n + k];
      const double djk = dist[edge.j * n + k];
      if (dik > radius || djk > radius) continue;
      out.push_back({std::max({edge.length, dik, djk}), triangle_id(edge.i, edge.j, k)});
    }
  };
  struct Owner {
    std::size_t edge;
    std::ptrdiff_t stored;  // index into `reduced`, -1 for a bare coboundary
  };
  std::unordered_map<std::uint64_t, Owner> pivot_owner;
  std::vector<Column> reduced;
  Column work, source, scratch;
  for (std::size_t e = edges.size(); e-- > 0;) {
    if (cleared[e]) continue;
    const Edge& edge = edges[e];
    // Earliest cofacet without building the column.
    Entry pivot{0.0, 0};
    bool any = false;
    for (std::uint32_t k = 0; k < n; ++k) {
      if (k == edge.i || k == edge.j) continue;
      const double dik = dist[edge.i * n + k];
      const double djk = dist[edge.j * n + k];
      if (dik > radius || djk > radius) continue;
      const Entry c{std::max({edge.length, dik, djk}), triangle_id(edge.i, edge.j, k)};
      if (!any || c < pivot) pivot = c;
      any = true;
    }
    if (!any) {
      if (edge.length < radius) pd.points.push_back({edge.length, radius, 1});
      continue;
    }
    bool touched = false;
    for (auto it = pivot_owner.find(pivot.id); it != pivot_owner.end(); it = pivot_owner.find(work.front().id)) {
      if (!touched) {
        coboundary(edge, work);
        std::sort(work.begin(), work.end());
        touched = true;
      }
      if (it->second.stored >= 0) {
        add_column(work, reduced[static_cast<std::size_t>(it->second.stored)], scratch);
      } else {
        coboundary(edges[it->second.edge], source);
        std::sort(source.begin(), source.end());
        add_column(work, source, scratch);
      }
      if (work.empty()) break;
    }

    if (touched && work.empty()) {
      if (edge.length < radius) pd.points.push_back({edge.length, radius, 1});
      continue;
    }
    if (touched) pivot = work.front();
    const double death = pivot.diameter;
    if (edge.length < death) pd.points.push_back({edge.length, death, 1});
    if (touched) {
      pivot_owner.emplace(pivot.id, Owner{e, static_cast<std::ptrdiff_t>(reduced.size())});
      reduced.push_back(work);
    } else {
      pivot_owner.emplace(pivot.id, Owner{e, -1});
    }
  }
  return pd;
}

PersistenceDiagram rips_pd(const PointCloud& cloud, const RipsOptions& options) {
  if (cloud.size() == 0) throw ShapeError("Rips persistence needs a nonempty point cloud");
  const auto dist = pairwise_distances(cloud);
  return rips_pd_from_distances(dist, cloud.size(), options);
}

}  // namespace totopo
