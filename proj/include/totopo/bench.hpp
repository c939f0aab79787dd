#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "totopo/dataset.hpp"
#include "totopo/ensemble.hpp"
#include "totopo/features.hpp"
#include "totopo/learner.hpp"

namespace totopo {

inline constexpr const char* kTotopo = "TOTOPO";
inline constexpr const char* kEuclidean = "1NN-ED";
inline constexpr const char* kDtw = "1NN-DTW";

struct SyntheticSpec {
  std::string name = "synthetic";
  std::vector<std::string> generators{"sine:5", "sine:11", "noise"};
  int n_train = 100;  // instances per split, classes as balanced as possible
  int n_test = 100;
  int length = 128;
  std::uint64_t seed = 7;
};

enum class Ranking { train_loss, validation_loss };

struct RunConfig {
  // Train files (the test file replaces "_TRAIN" with "_TEST") or directories
  // holding *_TRAIN.{ts,csv} files.
  std::vector<std::string> datasets;
  std::vector<SyntheticSpec> synthetic;
  DescriptorConfig descriptors;
  // Architecture and optimizer; shapes, class count and seed are set per learner.
  ConvNetConfig learner;
  bool normalize = true;
  std::vector<int> noise_levels{0, 1, 2, 3};
  bool baseline_euclidean = true;
  bool baseline_dtw = true;
  std::optional<std::size_t> dtw_window;
  Ranking ranking = Ranking::train_loss;
  double validation_fraction = 0.2;  // only with Ranking::validation_loss
  bool parallel_learners = true;
  std::string output_dir = "totopo_out";
  std::uint64_t seed = 0;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

// FNV-1a over the canonical JSON of everything except output_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Noise level -> SNR in dB: 1 -> 20, 2 -> 15, 3 -> 10; 0 means no noise.
std::optional<double> snr_for_level(int level);

struct NamedDataset {
  std::string name;
  LabeledDataset train;
  LabeledDataset test;  // labels aligned with train
};

// Resolves cfg.datasets and cfg.synthetic, sorted by name.
std::vector<NamedDataset> load_datasets(const RunConfig& cfg);
NamedDataset make_synthetic(const SyntheticSpec& spec);

struct TotopoPrediction {
  std::map<std::string, ProbabilityMatrix> per_model;
  CombinedPrediction combined;
};

// The fitted pipeline: descriptor settings, scalers and four trained learners.
class TotopoModel {
 public:
  static TotopoModel fit(const RunConfig& cfg, const LabeledDataset& train);
  TotopoPrediction predict(const LabeledDataset& test) const;

  const std::map<std::string, double>& ranking_losses() const { return losses_; }
  const EnsembleVotes& votes() const { return votes_; }
  const std::map<std::string, TrainReport>& reports() const { return reports_; }
  const std::map<std::string, ConvNetModel>& models() const { return models_; }
  // Descriptor manifest of the training split.
  const std::string& descriptor_manifest() const { return descriptor_manifest_; }

 private:
  RunConfig cfg_;
  BettiRanges ranges_;
  std::map<std::string, FeatureScaler> scalers_;
  std::map<std::string, ConvNetModel> models_;
  std::map<std::string, TrainReport> reports_;
  std::map<std::string, double> losses_;
  EnsembleVotes votes_;
  std::string descriptor_manifest_;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  int class_count_ = 0;
};

struct TotopoResult {
  double accuracy = 0.0;
  std::vector<int> predicted;
  std::map<std::string, double> learner_accuracy;
  std::map<std::string, std::vector<int>> learner_predicted;
  std::map<std::string, double> ranking_losses;
  EnsembleVotes votes;
};

// Fit on train, evaluate on test. Stage failures surface as PipelineError; a
// train split with fewer than two classes is a ContractError. When
// `artifacts` is set, manifests and prediction files are written there.
TotopoResult run_totopo(const RunConfig& cfg, const LabeledDataset& train, const LabeledDataset& test,
                        const std::optional<std::filesystem::path>& artifacts = std::nullopt);

struct ResultRow {
  std::string dataset;
  std::string method;
  double accuracy = 0.0;
};

using ResultTable = std::vector<ResultRow>;

// Rank 1 is the best accuracy; ties share the mean rank. Every method must
// have a result on every dataset.
std::map<std::string, double> average_ranks(const ResultTable& table);

// (method - reference) accuracy in percentage points, per dataset.
std::map<std::string, double> improvement_over(const ResultTable& table, const std::string& method,
                                               const std::string& reference);

std::string format_results_csv(const ResultTable& table, const std::string& hash);
ResultTable parse_results_csv(const std::string& text);
std::string format_ranks_csv(const std::map<std::string, double>& ranks, const std::string& hash);

// Runs TOTOPO and the enabled baselines on every dataset and writes
// results.csv, ranks.csv, improvement.csv and per-dataset artifacts.
ResultTable run_benchmark(const RunConfig& cfg);

struct NoiseRow {
  std::string dataset;
  std::string method;
  int level = 0;
  double accuracy = 0.0;
};

// Trains once on the clean train split, then evaluates each level with noise
// added to the test split only. Seeds depend on cfg.seed and the level.
std::vector<NoiseRow> noise_sweep(const RunConfig& cfg, const NamedDataset& dataset);
std::string format_noise_csv(const std::vector<NoiseRow>& rows, const std::string& hash);

// Runs noise_sweep over every dataset and writes noise_curve.csv.
std::vector<NoiseRow> run_noise_sweep(const RunConfig& cfg);

}  // namespace totopo
