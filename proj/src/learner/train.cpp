#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "totopo/error.hpp"
#include "totopo/learner.hpp"

namespace totopo {

namespace {

class Adam {
 public:
  Adam(const OptimizerSpec& spec, std::size_t n) : spec_(spec), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    if (spec_.kind == OptimizerSpec::Kind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= spec_.learning_rate * grads[i];
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = spec_.beta1 * m_[i] + (1.0 - spec_.beta1) * grads[i];
      v_[i] = spec_.beta2 * v_[i] + (1.0 - spec_.beta2) * grads[i] * grads[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= spec_.learning_rate * mhat / (std::sqrt(vhat) + spec_.epsilon);
    }
  }

 private:
  OptimizerSpec spec_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

TrainReport train(ConvNetModel& model, const SeriesBatch& inputs, std::span<const int> labels,
                  const std::string& model_name) {
  const auto& cfg = model.config();
  if (labels.size() != inputs.count) throw ContractError("one label per training instance is required");
  if (inputs.count == 0) throw ContractError("training set is empty");
  std::vector<char> seen(cfg.class_count, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= cfg.class_count) throw ContractError("label out of range");
    seen[static_cast<std::size_t>(y)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw ContractError("training set needs at least one instance of every class");

  std::mt19937_64 rng(cfg.seed ^ 0x5EEDF00DULL);
  Adam opt(cfg.optimizer, model.params().size());
  std::vector<std::size_t> order(inputs.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t B = cfg.optimizer.batch_size;
  const std::size_t stride = inputs.instance_size();

  TrainReport report;
  report.model_name = model_name;
  const std::size_t epochs = std::max<std::size_t>(1, cfg.optimizer.epochs);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += B) {
      const std::size_t n = std::min(B, order.size() - start);
      SeriesBatch batch(n, inputs.channels, inputs.length);
      std::vector<int> y(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[start + k];
        std::copy_n(inputs.data.begin() + static_cast<std::ptrdiff_t>(src * stride), stride,
                    batch.data.begin() + static_cast<std::ptrdiff_t>(k * stride));
        y[k] = labels[src];
      }
      const DropoutMasks masks = sample_dropout(cfg, n, rng);
      auto lg = loss_and_grads(model, batch, y, &masks);
      if (!std::isfinite(lg.loss))
        throw TrainingError("non-finite training loss for model '" + model_name + "' at epoch " +
                            std::to_string(epoch + 1));
      opt.step(model.params(), lg.gradients);
      epoch_loss += lg.loss * static_cast<double>(n);
    }
    report.loss_curve.push_back(epoch_loss / static_cast<double>(inputs.count));
  }
  report.final_train_loss = report.loss_curve.back();
  return report;
}

FeatureScaler FeatureScaler::fit(const SeriesBatch& train) {
  if (train.count == 0) throw ContractError("cannot fit a scaler on an empty batch");
  FeatureScaler s;
  const std::size_t F = train.instance_size();
  s.channels_ = train.channels;
  s.length_ = train.length;
  s.mean_.assign(F, 0.0);
  s.scale_.assign(F, 1.0);
  for (std::size_t i = 0; i < train.count; ++i) {
    const auto x = train.instance(i);
    for (std::size_t f = 0; f < F; ++f) s.mean_[f] += x[f];
  }
  for (double& m : s.mean_) m /= static_cast<double>(train.count);
  std::vector<double> var(F, 0.0);
  for (std::size_t i = 0; i < train.count; ++i) {
    const auto x = train.instance(i);
    for (std::size_t f = 0; f < F; ++f) var[f] += (x[f] - s.mean_[f]) * (x[f] - s.mean_[f]);
  }
  for (std::size_t f = 0; f < F; ++f) {
    const double sd = std::sqrt(var[f] / static_cast<double>(train.count));
    // Constant features are only centred.
    s.scale_[f] = sd > 1e-12 * std::max(1.0, std::abs(s.mean_[f])) ? sd : 1.0;
  }
  return s;
}

SeriesBatch FeatureScaler::apply(const SeriesBatch& batch) const {
  if (batch.channels != channels_ || batch.length != length_) throw ShapeError("scaler was fitted on a different feature shape");
  SeriesBatch out = batch;
  for (std::size_t i = 0; i < out.count; ++i) {
    auto x = out.instance(i);
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = (x[f] - mean_[f]) / scale_[f];
  }
  return out;
}

namespace {

nlohmann::json config_json(const ConvNetConfig& cfg) {
  nlohmann::json j;
  for (const auto& b : cfg.blocks) j["blocks"].push_back({{"channels", b.channels}, {"kernel", b.kernel}});
  j["leaky_relu_alpha"] = cfg.leaky_relu_alpha;
  j["dropout_rate"] = cfg.dropout_rate;
  j["dropout_after"] = cfg.dropout_after;
  j["class_count"] = cfg.class_count;
  j["input_channels"] = cfg.input_channels;
  j["input_length"] = cfg.input_length;
  j["optimizer"] = {{"kind", cfg.optimizer.kind == OptimizerSpec::Kind::adam ? "adam" : "sgd"},
                    {"learning_rate", cfg.optimizer.learning_rate},
                    {"epochs", cfg.optimizer.epochs},
                    {"batch_size", cfg.optimizer.batch_size},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"epsilon", cfg.optimizer.epsilon}};
  j["seed"] = cfg.seed;
  return j;
}

ConvNetConfig config_from(const nlohmann::json& j) {
  ConvNetConfig cfg;
  try {
    const auto& blocks = j.at("blocks");
    if (blocks.size() != 3) throw ConfigError("exactly three conv blocks are required");
    for (std::size_t b = 0; b < 3; ++b) {
      cfg.blocks[b].channels = blocks[b].at("channels").get<std::size_t>();
      cfg.blocks[b].kernel = blocks[b].at("kernel").get<std::size_t>();
    }
    cfg.leaky_relu_alpha = j.at("leaky_relu_alpha").get<double>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.dropout_after = j.at("dropout_after").get<std::array<bool, 3>>();
    cfg.class_count = j.at("class_count").get<std::size_t>();
    cfg.input_channels = j.at("input_channels").get<std::size_t>();
    cfg.input_length = j.at("input_length").get<std::size_t>();
    const auto& o = j.at("optimizer");
    const auto kind = o.at("kind").get<std::string>();
    if (kind != "adam" && kind != "sgd") throw ConfigError("unknown optimizer '" + kind + "'");
    cfg.optimizer.kind = kind == "adam" ? OptimizerSpec::Kind::adam : OptimizerSpec::Kind::sgd;
    cfg.optimizer.learning_rate = o.at("learning_rate").get<double>();
    cfg.optimizer.epochs = o.at("epochs").get<std::size_t>();
    cfg.optimizer.batch_size = o.at("batch_size").get<std::size_t>();
    cfg.optimizer.beta1 = o.at("beta1").get<double>();
    cfg.optimizer.beta2 = o.at("beta2").get<double>();
    cfg.optimizer.epsilon = o.at("epsilon").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad learner configuration: ") + e.what());
  }
  return cfg;
}

}  // namespace

std::string config_to_json(const ConvNetConfig& cfg) { return config_json(cfg).dump(2); }

ConvNetConfig config_from_json(const std::string& text) {
  try {
    return config_from(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("learner configuration is not JSON: ") + e.what());
  }
}

std::string save_checkpoint(const ConvNetModel& model) {
  nlohmann::json j;
  j["format"] = "totopo-convnet";
  j["version"] = 1;
  j["config"] = config_json(model.config());
  j["params"] = std::vector<double>(model.params().begin(), model.params().end());
  return j.dump();
}

ConvNetModel load_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not JSON: ") + e.what());
  }
  if (j.value("format", "") != "totopo-convnet") throw FormatError("not a convnet checkpoint");
  if (j.value("version", 0) != 1) throw FormatError("unsupported checkpoint version");
  try {
    return ConvNetModel(config_from(j.at("config")), j.at("params").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint: ") + e.what());
  }
}

std::string report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["model_name"] = report.model_name;
  j["final_train_loss"] = report.final_train_loss;
  j["loss_curve"] = report.loss_curve;
  return j.dump(2);
}

}  // namespace totopo
