#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "totopo/dataset.hpp"
#include "totopo/descriptors.hpp"
#include "totopo/persistence.hpp"
#include "totopo/tensor.hpp"

namespace totopo {

// The four learner inputs: raw series, Betti series, TDA summaries, L2 norms.
enum class Family { ts, betti, tda_feats, l2norms };

inline constexpr std::array<Family, 4> kAllFamilies{Family::ts, Family::betti, Family::tda_feats, Family::l2norms};

// "ts", "Betti", "TDAFeats", "L2norms".
std::string_view family_name(Family f);
Family family_from_name(std::string_view name);

enum class BettiLayout { separate_channels, interleaved };
enum class BettiRange { per_diagram, per_dataset };

struct DescriptorConfig {
  EmbeddingConfig embedding{10, 1, 1};  // point cloud behind the Rips diagram
  SummaryConfig summary;
  std::size_t betti_k = 100;
  BettiLayout betti_layout = BettiLayout::separate_channels;
  BettiRange betti_range = BettiRange::per_diagram;
  L2NormConfig l2;  // l2.d follows embedding.window
};

struct InstanceDiagrams {
  std::vector<PersistenceDiagram> direct;  // one per channel
  PersistenceDiagram rips;                 // dims 0 and 1 of the delay embedding
};

InstanceDiagrams compute_diagrams(const TimeSeries& series, const DescriptorConfig& cfg);

// Radius ranges for the two Betti channels when they are shared across a dataset.
using BettiRanges = std::array<std::optional<std::pair<double, double>>, 2>;

BettiRanges dataset_betti_ranges(const std::vector<InstanceDiagrams>& diagrams);

// Descriptor blocks of one instance, channel-major.
struct InstanceDescriptors {
  std::vector<std::vector<double>> betti;     // 2 x k, or 1 x 2k interleaved
  std::vector<double> tda_feats;              // 5 per input channel + 10
  std::vector<std::vector<double>> l2norms;   // 1 or 2 channels
};

InstanceDescriptors compute_descriptors(const TimeSeries& series, const InstanceDiagrams& diagrams,
                                        const DescriptorConfig& cfg, const BettiRanges& ranges = {});

struct DatasetDescriptors {
  SeriesBatch ts;
  SeriesBatch betti;
  SeriesBatch tda_feats;  // one channel
  SeriesBatch l2norms;

  const SeriesBatch& of(Family f) const;
};

// `ranges` applies only with BettiRange::per_dataset; pass the training split's.
DatasetDescriptors extract_descriptors(const LabeledDataset& dataset, const DescriptorConfig& cfg,
                                       const std::vector<InstanceDiagrams>& diagrams, const BettiRanges& ranges = {});

std::vector<InstanceDiagrams> compute_all_diagrams(const LabeledDataset& dataset, const DescriptorConfig& cfg);

// CSV rows `instance,label,family,values...` (values channel-major) for the
// three descriptor families.
std::string format_descriptor_csv(const LabeledDataset& dataset, const DatasetDescriptors& descriptors);

// JSON manifest: parameters, conventions and the shape of every family.
std::string descriptor_manifest_json(const DescriptorConfig& cfg, const DatasetDescriptors& descriptors);

}  // namespace totopo
