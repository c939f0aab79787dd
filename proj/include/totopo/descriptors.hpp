#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "totopo/persistence.hpp"

namespace totopo {

struct SummaryConfig {
  double ratio = 0.5;  // relevance threshold as a fraction of the longest lifetime, in (0, 1)
};

// (count, max lifetime, relevant count, mean lifetime, lifetime sum) of one
// homology dimension. Empty sets give all zeros.
struct HoleSummary {
  double count = 0;
  double max_lifetime = 0;
  double relevant = 0;
  double mean_lifetime = 0;
  double lifetime_sum = 0;

  std::array<double, 5> values() const { return {count, max_lifetime, relevant, mean_lifetime, lifetime_sum}; }
};

HoleSummary summarize_pd(const PersistenceDiagram& pd, int dim, const SummaryConfig& cfg = {});

// Fifteen values: summaries of direct dim 0, Rips dim 0, Rips dim 1 in that order.
using TdaSummaries = std::array<double, 15>;

TdaSummaries totopo_summaries(const PersistenceDiagram& direct, const PersistenceDiagram& rips,
                              const SummaryConfig& cfg = {});

// Uniform grid of `k` radii. `range` overrides the diagram's own
// [min birth, max death] so that several diagrams share one grid.
struct BettiConfig {
  std::size_t k = 100;
  std::optional<std::pair<double, double>> range;
};

struct BettiSeries {
  std::vector<double> radius_grid;
  std::vector<int> values;  // features alive at each radius, b <= r < d
};

BettiSeries betti_series(const PersistenceDiagram& pd, int dim, const BettiConfig& cfg = {});

struct LandscapeConfig {
  std::size_t level_count = 5;
  std::size_t grid_size = 100;
  std::optional<std::pair<double, double>> range;
};

// levels[k][i] = lambda_{k+1}(grid[i]).
struct PersistenceLandscape {
  std::vector<double> grid;
  std::vector<std::vector<double>> levels;
};

PersistenceLandscape landscape(const PersistenceDiagram& pd, int dim, const LandscapeConfig& cfg = {});

// sqrt(sum_k integral lambda_k(t)^2 dt), trapezoidal rule on the sampled grid.
double landscape_l2(const PersistenceLandscape& ls);

struct L2NormConfig {
  std::size_t d = 10;         // embedding window
  std::size_t W = 20;         // embedding vectors per point cloud
  std::size_t stride_W = 1;
  bool include_dim0 = false;  // also emit the dim-0 landscape norms
  LandscapeConfig landscape;
};

struct L2NormSeries {
  std::vector<double> values;       // dim-1 landscape norms, in time order
  std::vector<double> values_dim0;  // empty unless include_dim0
  std::size_t W = 0;
  std::size_t d = 0;
};

std::size_t l2_norm_count(std::size_t length, const L2NormConfig& cfg);

// Slides a window of W consecutive embedding vectors over the delay embedding
// of `signal`; each window's Rips diagram is turned into a landscape norm.
L2NormSeries l2_norm_series(std::span<const double> signal, const L2NormConfig& cfg = {});

// Multichannel variant over the concatenated-window embedding.
L2NormSeries l2_norm_series(const std::vector<std::span<const double>>& channels, const L2NormConfig& cfg = {});

// Evenly spaced values from lo to hi inclusive; the last entry is hi exactly.
// A degenerate range (hi <= lo) widens to [lo, lo + 1].
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

// [min birth, max death] of the dim-`dim` points, or nullopt when there are none.
std::optional<std::pair<double, double>> diagram_range(const PersistenceDiagram& pd, int dim);

}  // namespace totopo
