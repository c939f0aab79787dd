#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "totopo/tensor.hpp"

namespace totopo {

struct ConvBlockSpec {
  std::size_t channels = 64;
  std::size_t kernel = 7;
};

struct OptimizerSpec {
  enum class Kind { adam, sgd };
  Kind kind = Kind::adam;
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Three conv blocks (same padding, LeakyReLU), global average pooling over
// time, a dense layer and softmax. Dropout follows exactly two blocks.
struct ConvNetConfig {
  std::array<ConvBlockSpec, 3> blocks{{{64, 7}, {64, 5}, {64, 3}}};
  double leaky_relu_alpha = 0.01;
  double dropout_rate = 0.3;
  std::array<bool, 3> dropout_after{true, true, false};
  std::size_t class_count = 2;
  std::size_t input_channels = 1;
  std::size_t input_length = 1;
  OptimizerSpec optimizer;
  std::uint64_t seed = 0;

  // Throws ConfigError on inconsistent values.
  void validate() const;
};

// Closed-form number of trainable parameters.
std::size_t parameter_count(const ConvNetConfig& cfg);

// Offsets of each parameter group inside the flat parameter vector.
struct ParamLayout {
  struct Slot {
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  std::array<Slot, 3> conv_weight;  // [out][in][kernel]
  std::array<Slot, 3> conv_bias;
  Slot dense_weight;  // [class][channels of block 3]
  Slot dense_bias;
  std::size_t total = 0;

  static ParamLayout for_config(const ConvNetConfig& cfg);
};

class ConvNetModel {
 public:
  ConvNetModel() = default;
  ConvNetModel(ConvNetConfig cfg, std::vector<double> params);

  const ConvNetConfig& config() const noexcept { return cfg_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<const double> slot(const ParamLayout::Slot& s) const { return {params_.data() + s.offset, s.size}; }
  std::span<double> slot(const ParamLayout::Slot& s) { return {params_.data() + s.offset, s.size}; }

 private:
  ConvNetConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
};

// Fan-in scaled uniform weights, zero biases; deterministic in cfg.seed.
ConvNetModel init_model(const ConvNetConfig& cfg);

// Inverted-dropout multipliers (0 or 1/(1-p)) for the blocks that drop out.
struct DropoutMasks {
  std::array<std::vector<double>, 3> block;  // empty when the block has no dropout
};

DropoutMasks sample_dropout(const ConvNetConfig& cfg, std::size_t batch_size, std::mt19937_64& rng);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// Class probabilities. `masks == nullptr` is inference mode (no dropout).
ProbabilityMatrix forward(const ConvNetModel& model, const SeriesBatch& batch, const DropoutMasks* masks = nullptr);

struct LossAndGrads {
  double loss = 0.0;              // mean cross-entropy over the batch
  std::vector<double> gradients;  // same layout as the parameters
};

LossAndGrads loss_and_grads(const ConvNetModel& model, const SeriesBatch& batch, std::span<const int> labels,
                            const DropoutMasks* masks = nullptr);

double batch_loss(const ConvNetModel& model, const SeriesBatch& batch, std::span<const int> labels,
                  const DropoutMasks* masks = nullptr);

struct TrainReport {
  std::string model_name;
  double final_train_loss = 0.0;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

// Mini-batch training with per-epoch shuffling; deterministic in cfg.seed.
// Throws TrainingError if the loss becomes non-finite.
TrainReport train(ConvNetModel& model, const SeriesBatch& inputs, std::span<const int> labels,
                  const std::string& model_name);

ProbabilityMatrix predict_proba(const ConvNetModel& model, const SeriesBatch& inputs);

// Per-feature (channel, position) standardisation fitted on a training split.
class FeatureScaler {
 public:
  static FeatureScaler fit(const SeriesBatch& train);
  SeriesBatch apply(const SeriesBatch& batch) const;
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

std::string config_to_json(const ConvNetConfig& cfg);
ConvNetConfig config_from_json(const std::string& text);

// Versioned JSON checkpoint holding the configuration and every parameter.
std::string save_checkpoint(const ConvNetModel& model);
ConvNetModel load_checkpoint(const std::string& text);

std::string report_to_json(const TrainReport& report);

}  // namespace totopo
