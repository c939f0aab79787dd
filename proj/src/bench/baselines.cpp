#include "totopo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "totopo/error.hpp"

namespace totopo {

namespace {

template <class Cost>
double dtw_core(std::size_t n, std::size_t m, std::optional<std::size_t> window, Cost cost) {
  if (n == 0 || m == 0) throw ContractError("DTW needs nonempty sequences");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t gap = n > m ? n - m : m - n;
  const std::size_t w = window ? std::max(*window, gap) : std::max(n, m);
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = cost(i - 1, j - 1) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b, std::optional<std::size_t> window) {
  return dtw_core(a.size(), b.size(), window, [&](std::size_t i, std::size_t j) {
    const double d = a[i] - b[j];
    return d * d;
  });
}

double dtw_distance(const TimeSeries& a, const TimeSeries& b, std::optional<std::size_t> window) {
  if (a.channel_count() != b.channel_count()) throw ShapeError("DTW inputs have different channel counts");
  return dtw_core(a.length(), b.length(), window, [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.channel_count(); ++c) {
      const double d = a.channel(c)[i] - b.channel(c)[j];
      s += d * d;
    }
    return s;
  });
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ContractError("prediction and label counts differ");
  if (truth.empty()) throw ContractError("accuracy of an empty split");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

template <class Dist>
NeighbourResult nearest(const LabeledDataset& train, const LabeledDataset& test, Dist dist) {
  if (train.size() == 0) throw ContractError("1-NN needs a nonempty train split");
  NeighbourResult r;
  for (const auto& q : test.instances) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double d = dist(q, train.instances[i], best);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    r.predicted.push_back(train.labels[arg]);
  }
  r.accuracy = accuracy(r.predicted, test.labels);
  return r;
}

}  // namespace

NeighbourResult nn_euclidean(const LabeledDataset& train, const LabeledDataset& test) {
  return nearest(train, test, [](const TimeSeries& a, const TimeSeries& b, double) {
    if (a.channel_count() != b.channel_count() || a.length() != b.length())
      throw ShapeError("Euclidean 1-NN needs equal lengths and channel counts");
    double s = 0.0;
    for (std::size_t c = 0; c < a.channel_count(); ++c) {
      const auto x = a.channel(c), y = b.channel(c);
      for (std::size_t t = 0; t < x.size(); ++t) s += (x[t] - y[t]) * (x[t] - y[t]);
    }
    return s;
  });
}

NeighbourResult nn_dtw(const LabeledDataset& train, const LabeledDataset& test, std::optional<std::size_t> window) {
  return nearest(train, test,
                 [&](const TimeSeries& a, const TimeSeries& b, double) { return dtw_distance(a, b, window); });
}

}  // namespace totopo
