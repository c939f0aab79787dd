#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace totopo {

struct PersistencePoint {
  double birth = 0.0;
  double death = 0.0;
  int dim = 0;

  double lifetime() const noexcept { return death - birth; }
  auto operator<=>(const PersistencePoint&) const = default;
};

enum class DiagramSource { direct, rips };

const char* to_string(DiagramSource source);

// Multiset of persistence points. Essential classes are stored with a finite,
// capped death so every lifetime is finite.
struct PersistenceDiagram {
  std::vector<PersistencePoint> points;
  DiagramSource source = DiagramSource::direct;

  std::vector<PersistencePoint> in_dim(int dim) const;
  // Points sorted by (dim, birth, death): a canonical form for multiset comparison.
  std::vector<PersistencePoint> sorted() const;
};

// Vectors of a common dimension, stored row-major.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::size_t dim, std::vector<double> flat);
  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return dim_ ? flat_.size() / dim_ : 0; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> operator[](std::size_t i) const { return {flat_.data() + i * dim_, dim_}; }
  const std::vector<double>& flat() const noexcept { return flat_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> flat_;
};

struct EmbeddingConfig {
  std::size_t window = 10;  // samples per embedded vector
  std::size_t stride = 1;   // step between consecutive windows
  std::size_t delay = 1;    // step between samples inside one window
};

// 0-dim persistence of the sublevel-set filtration of a path graph. One point
// per component born at a local minimum; the oldest component dies at the
// global maximum. Ties in value are ordered by sample index.
PersistenceDiagram sublevel_pd(std::span<const double> signal);

// Sliding windows [x_t, x_{t+delay}, ..., x_{t+(d-1)delay}] for t = 0, stride, ...
PointCloud takens_embedding(std::span<const double> signal, const EmbeddingConfig& cfg);

// Multichannel variant: each vector concatenates the per-channel windows.
PointCloud takens_embedding(const std::vector<std::span<const double>>& channels,
                            const EmbeddingConfig& cfg);

std::size_t embedding_count(std::size_t length, const EmbeddingConfig& cfg);

struct RipsOptions {
  int max_dim = 1;
  // Filtration threshold; when unset, the largest pairwise distance.
  std::optional<double> max_radius;
};

// Vietoris-Rips persistence (Euclidean metric) for dims 0 and 1.
// H0 comes from Kruskal's union-find; H1 from a mod-2 reduction of the
// coboundary matrix of edges, with columns of H0-death edges cleared.
// Essential classes die at the filtration threshold. Zero-length H1 pairs are
// dropped; H0 keeps one point per input vector.
PersistenceDiagram rips_pd(const PointCloud& cloud, const RipsOptions& options = {});

// Same result from the pairwise distance matrix (row-major, n x n).
PersistenceDiagram rips_pd_from_distances(std::span<const double> distances, std::size_t n,
                                          const RipsOptions& options = {});

std::vector<double> pairwise_distances(const PointCloud& cloud);

// Bottleneck distance between the dim-`dim` parts of two diagrams, points
// being allowed to match the diagonal. Quadratic in memory; intended for
// small diagrams.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

// Text form: a versioned header line, then one "dim birth death" line per
// point with 17 significant digits.
std::string format_diagram(const PersistenceDiagram& pd);
PersistenceDiagram parse_diagram(std::string_view text);

}  // namespace totopo
