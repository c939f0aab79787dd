#include <algorithm>
#include <cmath>
#include <numeric>

#include "totopo/error.hpp"
#include "totopo/persistence.hpp"
#include "union_find.hpp"

namespace totopo {

const char* to_string(DiagramSource source) { return source == DiagramSource::direct ? "direct" : "rips"; }

std::vector<PersistencePoint> PersistenceDiagram::in_dim(int dim) const {
  std::vector<PersistencePoint> out;
  for (const auto& p : points) {
    if (p.dim == dim) out.push_back(p);
  }
  return out;
}

std::vector<PersistencePoint> PersistenceDiagram::sorted() const {
  auto out = points;
  std::sort(out.begin(), out.end(), [](const PersistencePoint& a, const PersistencePoint& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
  return out;
}

PersistenceDiagram sublevel_pd(std::span<const double> signal) {
  PersistenceDiagram pd;
  pd.source = DiagramSource::direct;
  const std::size_t n = signal.size();
  if (n == 0) throw ShapeError("sublevel_pd needs at least one sample");
  for (double v : signal) {
    if (!std::isfinite(v)) throw ShapeError("sublevel_pd needs finite values");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return signal[a] < signal[b]; });

  // Each root remembers the vertex that created its component; since vertices
  // enter in filtration order, the earlier-entered creator is the elder.
  std::vector<std::size_t> rank_of(n);
  for (std::size_t r = 0; r < n; ++r) rank_of[order[r]] = r;

  detail::UnionFind uf(n);
  std::vector<std::size_t> creator(n);
  std::vector<char> active(n, 0);

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t v = order[r];
    active[v] = 1;
    creator[v] = v;
    std::size_t roots[2];
    std::size_t k = 0;
    if (v > 0 && active[v - 1]) roots[k++] = uf.find(v - 1);
    if (v + 1 < n && active[v + 1]) roots[k++] = uf.find(v + 1);

    if (k == 0) continue;  // local minimum: a new component
    if (k == 1) {
      const std::size_t root = uf.unite(roots[0], v);
      creator[root] = creator[roots[0]];
      continue;
    }
    const std::size_t a = creator[roots[0]];
    const std::size_t b = creator[roots[1]];
    const std::size_t elder = rank_of[a] < rank_of[b] ? a : b;
    const std::size_t younger = elder == a ? b : a;
    pd.points.push_back({signal[younger], signal[v], 0});
    std::size_t root = uf.unite(roots[0], roots[1]);
    root = uf.unite(root, v);
    creator[root] = elder;
  }

  const double global_max = *std::max_element(signal.begin(), signal.end());
  pd.points.push_back({signal[order.front()], global_max, 0});
  return pd;
}

PointCloud::PointCloud(std::size_t dim, std::vector<double> flat) : dim_(dim), flat_(std::move(flat)) {
  if (dim_ == 0) throw ShapeError("point cloud dimension must be positive");
  if (flat_.empty() || flat_.size() % dim_ != 0) throw ShapeError("point cloud data is not a whole number of vectors");
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("point cloud must be nonempty");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw ShapeError("point cloud vectors differ in dimension");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return PointCloud(d, std::move(flat));
}

std::size_t embedding_count(std::size_t length, const EmbeddingConfig& cfg) {
  if (cfg.window == 0 || cfg.stride == 0 || cfg.delay == 0)
    throw ConfigError("embedding window, stride and delay must be positive");
  const std::size_t span = (cfg.window - 1) * cfg.delay + 1;
  if (span > length)
    throw ShapeError("embedding window spans " + std::to_string(span) + " samples but the series has " +
                     std::to_string(length));
  return (length - span) / cfg.stride + 1;
}

PointCloud takens_embedding(std::span<const double> signal, const EmbeddingConfig& cfg) {
  return takens_embedding(std::vector<std::span<const double>>{signal}, cfg);
}

PointCloud takens_embedding(const std::vector<std::span<const double>>& channels,
                            const EmbeddingConfig& cfg) {
  if (channels.empty()) throw ShapeError("embedding needs at least one channel");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) throw ShapeError("embedding channels differ in length");
  }
  const std::size_t count = embedding_count(n, cfg);
  const std::size_t dim = cfg.window * channels.size();
  std::vector<double> flat;
  flat.reserve(count * dim);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * cfg.stride;
    for (const auto& ch : channels) {
      for (std::size_t j = 0; j < cfg.window; ++j) flat.push_back(ch[start + j * cfg.delay]);
    }
  }
  return PointCloud(dim, std::move(flat));
}

}  // namespace totopo
