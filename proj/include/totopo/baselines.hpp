#pragma once

#include <optional>
#include <span>
#include <vector>

#include "totopo/dataset.hpp"

namespace totopo {

// Classical DTW with squared point cost. `window` is a Sakoe-Chiba radius;
// it is widened to |len(a) - len(b)| so that a path always exists.
double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> window = std::nullopt);

// Dependent multivariate DTW: one warping path, per-step cost summed over channels.
double dtw_distance(const TimeSeries& a, const TimeSeries& b, std::optional<std::size_t> window = std::nullopt);

struct NeighbourResult {
  std::vector<int> predicted;
  double accuracy = 0.0;
};

// 1-NN on flattened channels. Ties go to the lowest train index.
NeighbourResult nn_euclidean(const LabeledDataset& train, const LabeledDataset& test);
NeighbourResult nn_dtw(const LabeledDataset& train, const LabeledDataset& test,
                       std::optional<std::size_t> window = std::nullopt);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace totopo
