#include "totopo/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "totopo/error.hpp"

namespace totopo {

HoleSummary summarize_pd(const PersistenceDiagram& pd, int dim, const SummaryConfig& cfg) {
  if (!(cfg.ratio > 0.0 && cfg.ratio < 1.0)) throw ConfigError("summary ratio must lie in (0, 1)");
  HoleSummary s;
  std::vector<double> lifetimes;
  for (const auto& p : pd.points) {
    if (p.dim == dim) lifetimes.push_back(p.lifetime());
  }
  if (lifetimes.empty()) return s;
  s.count = static_cast<double>(lifetimes.size());
  s.max_lifetime = *std::max_element(lifetimes.begin(), lifetimes.end());
  // Sorting first makes the sum independent of point order.
  std::sort(lifetimes.begin(), lifetimes.end());
  const double threshold = cfg.ratio * s.max_lifetime;
  for (double l : lifetimes) {
    s.lifetime_sum += l;
    if (l >= threshold) s.relevant += 1;
  }
  s.mean_lifetime = s.lifetime_sum / s.count;
  return s;
}

TdaSummaries totopo_summaries(const PersistenceDiagram& direct, const PersistenceDiagram& rips,
                              const SummaryConfig& cfg) {
  if (direct.source != DiagramSource::direct) throw ContractError("first diagram must come from the direct filtration");
  if (rips.source != DiagramSource::rips) throw ContractError("second diagram must come from a Rips filtration");
  TdaSummaries out{};
  const HoleSummary blocks[3] = {summarize_pd(direct, 0, cfg), summarize_pd(rips, 0, cfg), summarize_pd(rips, 1, cfg)};
  for (std::size_t b = 0; b < 3; ++b) {
    const auto v = blocks[b].values();
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(5 * b));
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count < 2) throw ConfigError("a grid needs at least two points");
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::optional<std::pair<double, double>> diagram_range(const PersistenceDiagram& pd, int dim) {
  std::optional<std::pair<double, double>> r;
  for (const auto& p : pd.points) {
    if (p.dim != dim) continue;
    if (!r) {
      r = std::pair{p.birth, p.death};
    } else {
      r->first = std::min(r->first, p.birth);
      r->second = std::max(r->second, p.death);
    }
  }
  return r;
}

namespace {

std::vector<double> grid_for(const PersistenceDiagram& pd, int dim,
                             const std::optional<std::pair<double, double>>& forced, std::size_t count) {
  auto range = forced ? forced : diagram_range(pd, dim);
  if (!range) range = std::pair{0.0, 1.0};
  return uniform_grid(range->first, range->second, count);
}

}  // namespace

BettiSeries betti_series(const PersistenceDiagram& pd, int dim, const BettiConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("Betti series length must be at least 2");
  BettiSeries out;
  out.radius_grid = grid_for(pd, dim, cfg.range, cfg.k);
  out.values.assign(cfg.k, 0);
  for (const auto& p : pd.points) {
    if (p.dim != dim) continue;
    for (std::size_t i = 0; i < cfg.k; ++i) {
      const double r = out.radius_grid[i];
      if (p.birth <= r && r < p.death) ++out.values[i];
    }
  }
  return out;
}

PersistenceLandscape landscape(const PersistenceDiagram& pd, int dim, const LandscapeConfig& cfg) {
  if (cfg.level_count < 1) throw ConfigError("landscape needs at least one level");
  if (cfg.grid_size < 2) throw ConfigError("landscape grid needs at least two points");
  PersistenceLandscape ls;
  ls.grid = grid_for(pd, dim, cfg.range, cfg.grid_size);
  ls.levels.assign(cfg.level_count, std::vector<double>(cfg.grid_size, 0.0));
  const auto bars = pd.in_dim(dim);
  std::vector<double> tents(bars.size());
  for (std::size_t i = 0; i < ls.grid.size(); ++i) {
    const double t = ls.grid[i];
    for (std::size_t j = 0; j < bars.size(); ++j)
      tents[j] = std::max(0.0, std::min(t - bars[j].birth, bars[j].death - t));
    const std::size_t top = std::min(cfg.level_count, tents.size());
    std::partial_sort(tents.begin(), tents.begin() + static_cast<std::ptrdiff_t>(top), tents.end(),
                      std::greater<>());
    for (std::size_t k = 0; k < top; ++k) ls.levels[k][i] = tents[k];
  }
  return ls;
}

double landscape_l2(const PersistenceLandscape& ls) {
  double total = 0.0;
  for (const auto& level : ls.levels) {
    for (std::size_t i = 0; i + 1 < ls.grid.size(); ++i) {
      const double h = ls.grid[i + 1] - ls.grid[i];
      total += 0.5 * h * (level[i] * level[i] + level[i + 1] * level[i + 1]);
    }
  }
  return std::sqrt(total);
}

std::size_t l2_norm_count(std::size_t length, const L2NormConfig& cfg) {
  if (cfg.d == 0 || cfg.W == 0 || cfg.stride_W == 0) throw ConfigError("d, W and stride_W must be positive");
  if (length + 1 < cfg.d + cfg.W)
    throw ShapeError("series of length " + std::to_string(length) + " is shorter than d + W - 1 = " +
                     std::to_string(cfg.d + cfg.W - 1));
  const std::size_t vectors = length - cfg.d + 1;
  return (vectors - cfg.W) / cfg.stride_W + 1;
}

L2NormSeries l2_norm_series(std::span<const double> signal, const L2NormConfig& cfg) {
  return l2_norm_series(std::vector<std::span<const double>>{signal}, cfg);
}

L2NormSeries l2_norm_series(const std::vector<std::span<const double>>& channels, const L2NormConfig& cfg) {
  if (channels.empty()) throw ShapeError("l2_norm_series needs at least one channel");
  const std::size_t count = l2_norm_count(channels.front().size(), cfg);
  const PointCloud cloud = takens_embedding(channels, {cfg.d, 1, 1});
  const std::size_t n = cloud.size();
  const auto dist = pairwise_distances(cloud);

  L2NormSeries out;
  out.d = cfg.d;
  out.W = cfg.W;
  out.values.reserve(count);
  std::vector<double> local(cfg.W * cfg.W);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * cfg.stride_W;
    for (std::size_t i = 0; i < cfg.W; ++i)
      for (std::size_t j = 0; j < cfg.W; ++j) local[i * cfg.W + j] = dist[(start + i) * n + start + j];
    const auto pd = rips_pd_from_distances(local, cfg.W, {1, std::nullopt});
    out.values.push_back(landscape_l2(landscape(pd, 1, cfg.landscape)));
    if (cfg.include_dim0) out.values_dim0.push_back(landscape_l2(landscape(pd, 0, cfg.landscape)));
  }
  return out;
}

}  // namespace totopo
