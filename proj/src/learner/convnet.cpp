#include <algorithm>
#include <cmath>
#include <numeric>

#include "totopo/error.hpp"
#include "totopo/learner.hpp"

namespace totopo {

void ConvNetConfig::validate() const {
  for (const auto& b : blocks) {
    if (b.channels == 0 || b.kernel == 0) throw ConfigError("conv blocks need positive channels and kernel size");
  }
  if (std::count(dropout_after.begin(), dropout_after.end(), true) != 2)
    throw ConfigError("dropout must follow exactly two of the three blocks");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (!(leaky_relu_alpha >= 0.0) || !std::isfinite(leaky_relu_alpha)) throw ConfigError("leaky_relu_alpha must be >= 0");
  if (class_count < 2) throw ConfigError("class_count must be at least 2");
  if (input_channels == 0 || input_length == 0) throw ConfigError("input shape must be positive");
  if (optimizer.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(optimizer.learning_rate >= 0.0) || !std::isfinite(optimizer.learning_rate))
    throw ConfigError("learning_rate must be finite and nonnegative");
}

ParamLayout ParamLayout::for_config(const ConvNetConfig& cfg) {
  ParamLayout l;
  std::size_t at = 0;
  std::size_t in = cfg.input_channels;
  for (std::size_t b = 0; b < 3; ++b) {
    const auto& spec = cfg.blocks[b];
    l.conv_weight[b] = {at, spec.channels * in * spec.kernel};
    at += l.conv_weight[b].size;
    l.conv_bias[b] = {at, spec.channels};
    at += spec.channels;
    in = spec.channels;
  }
  l.dense_weight = {at, cfg.class_count * in};
  at += l.dense_weight.size;
  l.dense_bias = {at, cfg.class_count};
  at += cfg.class_count;
  l.total = at;
  return l;
}

std::size_t parameter_count(const ConvNetConfig& cfg) {
  std::size_t total = 0;
  std::size_t in = cfg.input_channels;
  for (const auto& b : cfg.blocks) {
    total += b.channels * (in * b.kernel + 1);
    in = b.channels;
  }
  return total + cfg.class_count * (in + 1);
}

ConvNetModel::ConvNetModel(ConvNetConfig cfg, std::vector<double> params)
    : cfg_(std::move(cfg)), layout_(ParamLayout::for_config(cfg_)), params_(std::move(params)) {
  cfg_.validate();
  if (params_.size() != layout_.total)
    throw ConfigError("parameter vector has " + std::to_string(params_.size()) + " entries, expected " +
                      std::to_string(layout_.total));
}

ConvNetModel init_model(const ConvNetConfig& cfg) {
  cfg.validate();
  const auto layout = ParamLayout::for_config(cfg);
  std::vector<double> params(layout.total, 0.0);
  std::mt19937_64 rng(cfg.seed);
  std::size_t in = cfg.input_channels;
  for (std::size_t b = 0; b < 3; ++b) {
    const double fan_in = static_cast<double>(in * cfg.blocks[b].kernel);
    std::uniform_real_distribution<double> u(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    const auto& s = layout.conv_weight[b];
    for (std::size_t i = 0; i < s.size; ++i) params[s.offset + i] = u(rng);
    in = cfg.blocks[b].channels;
  }
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(double(in)), 1.0 / std::sqrt(double(in)));
  for (std::size_t i = 0; i < layout.dense_weight.size; ++i) params[layout.dense_weight.offset + i] = u(rng);
  return ConvNetModel(cfg, std::move(params));
}

DropoutMasks sample_dropout(const ConvNetConfig& cfg, std::size_t batch_size, std::mt19937_64& rng) {
  DropoutMasks m;
  const double keep = 1.0 - cfg.dropout_rate;
  std::bernoulli_distribution kept(keep);
  for (std::size_t b = 0; b < 3; ++b) {
    if (!cfg.dropout_after[b]) continue;
    auto& mask = m.block[b];
    mask.resize(batch_size * cfg.blocks[b].channels * cfg.input_length);
    for (double& v : mask) v = kept(rng) ? 1.0 / keep : 0.0;
  }
  return m;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

namespace {

struct Shape {
  std::size_t n, in, out, length, kernel;
};

// y[n][o][t] = bias[o] + sum_{i,j} w[o][i][j] * x[n][i][t + j - pad], zero padded.
void conv_forward(const Shape& s, std::span<const double> x, std::span<const double> w, std::span<const double> bias,
                  std::vector<double>& y) {
  const std::size_t pad = (s.kernel - 1) / 2;
  const std::size_t L = s.length;
  y.assign(s.n * s.out * L, 0.0);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t o = 0; o < s.out; ++o) {
      double* yo = y.data() + (n * s.out + o) * L;
      std::fill(yo, yo + L, bias[o]);
      for (std::size_t i = 0; i < s.in; ++i) {
        const double* xi = x.data() + (n * s.in + i) * L;
        const double* wk = w.data() + (o * s.in + i) * s.kernel;
        for (std::size_t j = 0; j < s.kernel; ++j) {
          // valid t: 0 <= t + j - pad < L
          const std::size_t t0 = j < pad ? pad - j : 0;
          const std::size_t t1 = std::min(L, L + pad - j);
          const double wj = wk[j];
          const double* src = xi + (t0 + j) - pad;
          for (std::size_t t = t0; t < t1; ++t) yo[t] += wj * src[t - t0];
        }
      }
    }
  }
}

// Accumulates dw, dbias and (when dx is non-null) dx from dy.
void conv_backward(const Shape& s, std::span<const double> x, std::span<const double> w, std::span<const double> dy,
                   std::span<double> dw, std::span<double> dbias, std::vector<double>* dx) {
  const std::size_t pad = (s.kernel - 1) / 2;
  const std::size_t L = s.length;
  if (dx) dx->assign(s.n * s.in * L, 0.0);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t o = 0; o < s.out; ++o) {
      const double* g = dy.data() + (n * s.out + o) * L;
      double gsum = 0.0;
      for (std::size_t t = 0; t < L; ++t) gsum += g[t];
      dbias[o] += gsum;
      for (std::size_t i = 0; i < s.in; ++i) {
        const double* xi = x.data() + (n * s.in + i) * L;
        double* dxi = dx ? dx->data() + (n * s.in + i) * L : nullptr;
        const double* wk = w.data() + (o * s.in + i) * s.kernel;
        double* dwk = dw.data() + (o * s.in + i) * s.kernel;
        for (std::size_t j = 0; j < s.kernel; ++j) {
          const std::size_t t0 = j < pad ? pad - j : 0;
          const std::size_t t1 = std::min(L, L + pad - j);
          const std::size_t shift = (t0 + j) - pad;
          double acc = 0.0;
          for (std::size_t t = t0; t < t1; ++t) acc += g[t] * xi[shift + t - t0];
          dwk[j] += acc;
          if (dxi) {
            const double wj = wk[j];
            for (std::size_t t = t0; t < t1; ++t) dxi[shift + t - t0] += wj * g[t];
          }
        }
      }
    }
  }
}

struct Activations {
  std::array<std::vector<double>, 3> pre;  // conv outputs
  std::array<std::vector<double>, 4> act;  // act[0] = input, act[b+1] = output of block b
  std::vector<double> pooled;              // [n][channels]
  std::vector<double> logits;              // [n][classes]
};

void check_batch(const ConvNetConfig& cfg, const SeriesBatch& batch) {
  if (batch.channels != cfg.input_channels || batch.length != cfg.input_length)
    throw ContractError("batch shape [" + std::to_string(batch.channels) + " x " + std::to_string(batch.length) +
                        "] does not match the model input [" + std::to_string(cfg.input_channels) + " x " +
                        std::to_string(cfg.input_length) + "]");
  if (batch.data.size() != batch.count * batch.channels * batch.length)
    throw ContractError("batch data size is inconsistent with its shape");
}

void check_masks(const ConvNetConfig& cfg, std::size_t n, const DropoutMasks& masks) {
  for (std::size_t b = 0; b < 3; ++b) {
    const std::size_t want = cfg.dropout_after[b] ? n * cfg.blocks[b].channels * cfg.input_length : 0;
    if (masks.block[b].size() != want) throw ContractError("dropout mask does not match the batch");
  }
}

Activations run_forward(const ConvNetModel& model, const SeriesBatch& batch, const DropoutMasks* masks) {
  const auto& cfg = model.config();
  const auto& lay = model.layout();
  check_batch(cfg, batch);
  if (masks) check_masks(cfg, batch.count, *masks);
  const std::size_t N = batch.count;
  const std::size_t L = cfg.input_length;
  const double alpha = cfg.leaky_relu_alpha;

  Activations a;
  a.act[0] = batch.data;
  std::size_t in = cfg.input_channels;
  for (std::size_t b = 0; b < 3; ++b) {
    const Shape s{N, in, cfg.blocks[b].channels, L, cfg.blocks[b].kernel};
    conv_forward(s, a.act[b], model.slot(lay.conv_weight[b]), model.slot(lay.conv_bias[b]), a.pre[b]);
    auto& h = a.act[b + 1];
    h.resize(a.pre[b].size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double y = a.pre[b][i];
      h[i] = y > 0 ? y : alpha * y;
    }
    if (masks && cfg.dropout_after[b]) {
      const auto& m = masks->block[b];
      for (std::size_t i = 0; i < h.size(); ++i) h[i] *= m[i];
    }
    in = cfg.blocks[b].channels;
  }

  const std::size_t C = in;
  const std::size_t K = cfg.class_count;
  a.pooled.assign(N * C, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* h = a.act[3].data() + (n * C + c) * L;
      a.pooled[n * C + c] = std::accumulate(h, h + L, 0.0) / static_cast<double>(L);
    }
  }
  const auto wd = model.slot(lay.dense_weight);
  const auto bd = model.slot(lay.dense_bias);
  a.logits.assign(N * K, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      double z = bd[k];
      for (std::size_t c = 0; c < C; ++c) z += wd[k * C + c] * a.pooled[n * C + c];
      a.logits[n * K + k] = z;
    }
  }
  return a;
}

void check_labels(std::span<const int> labels, std::size_t n, std::size_t classes) {
  if (labels.size() != n) throw ContractError("one label per batch instance is required");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) throw ContractError("label out of range");
  }
}

double mean_cross_entropy(const Activations& a, std::span<const int> labels, std::size_t K) {
  const std::size_t N = labels.size();
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double* z = a.logits.data() + n * K;
    const double top = *std::max_element(z, z + K);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(z[k] - top);
    total += top + std::log(s) - z[labels[n]];
  }
  return total / static_cast<double>(N);
}

}  // namespace

ProbabilityMatrix forward(const ConvNetModel& model, const SeriesBatch& batch, const DropoutMasks* masks) {
  const auto a = run_forward(model, batch, masks);
  const std::size_t K = model.config().class_count;
  ProbabilityMatrix p(batch.count, K);
  for (std::size_t n = 0; n < batch.count; ++n) {
    const auto row = softmax(std::span<const double>(a.logits.data() + n * K, K));
    std::copy(row.begin(), row.end(), p.data.begin() + static_cast<std::ptrdiff_t>(n * K));
  }
  return p;
}

double batch_loss(const ConvNetModel& model, const SeriesBatch& batch, std::span<const int> labels,
                  const DropoutMasks* masks) {
  check_labels(labels, batch.count, model.config().class_count);
  return mean_cross_entropy(run_forward(model, batch, masks), labels, model.config().class_count);
}

LossAndGrads loss_and_grads(const ConvNetModel& model, const SeriesBatch& batch, std::span<const int> labels,
                            const DropoutMasks* masks) {
  const auto& cfg = model.config();
  const auto& lay = model.layout();
  check_labels(labels, batch.count, cfg.class_count);
  const Activations a = run_forward(model, batch, masks);
  const std::size_t N = batch.count;
  const std::size_t L = cfg.input_length;
  const std::size_t K = cfg.class_count;
  const std::size_t C = cfg.blocks[2].channels;
  const double alpha = cfg.leaky_relu_alpha;

  LossAndGrads out;
  out.loss = mean_cross_entropy(a, labels, K);
  out.gradients.assign(lay.total, 0.0);
  auto grad = [&](const ParamLayout::Slot& s) { return std::span<double>(out.gradients.data() + s.offset, s.size); };

  // Softmax + cross-entropy: dz = (p - onehot) / N.
  std::vector<double> dz(N * K);
  for (std::size_t n = 0; n < N; ++n) {
    const auto p = softmax(std::span<const double>(a.logits.data() + n * K, K));
    for (std::size_t k = 0; k < K; ++k)
      dz[n * K + k] = (p[k] - (static_cast<int>(k) == labels[n] ? 1.0 : 0.0)) / static_cast<double>(N);
  }

  const auto wd = model.slot(lay.dense_weight);
  auto dwd = grad(lay.dense_weight);
  auto dbd = grad(lay.dense_bias);
  std::vector<double> dpooled(N * C, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double g = dz[n * K + k];
      dbd[k] += g;
      for (std::size_t c = 0; c < C; ++c) {
        dwd[k * C + c] += g * a.pooled[n * C + c];
        dpooled[n * C + c] += g * wd[k * C + c];
      }
    }
  }

  // Global average pooling spreads each channel's gradient evenly over time.
  std::vector<double> dh(N * C * L);
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const double g = dpooled[nc] / static_cast<double>(L);
    std::fill(dh.begin() + static_cast<std::ptrdiff_t>(nc * L), dh.begin() + static_cast<std::ptrdiff_t>((nc + 1) * L), g);
  }

  std::vector<double> dx;
  for (std::size_t b = 3; b-- > 0;) {
    const std::size_t in = b == 0 ? cfg.input_channels : cfg.blocks[b - 1].channels;
    const Shape s{N, in, cfg.blocks[b].channels, L, cfg.blocks[b].kernel};
    if (masks && cfg.dropout_after[b]) {
      const auto& m = masks->block[b];
      for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= m[i];
    }
    const auto& pre = a.pre[b];
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= pre[i] > 0 ? 1.0 : alpha;
    conv_backward(s, a.act[b], model.slot(lay.conv_weight[b]), dh, grad(lay.conv_weight[b]), grad(lay.conv_bias[b]),
                  b > 0 ? &dx : nullptr);
    if (b > 0) dh.swap(dx);
  }
  return out;
}

ProbabilityMatrix predict_proba(const ConvNetModel& model, const SeriesBatch& inputs) {
  // Chunked so that activations stay small on large splits.
  const std::size_t chunk = 64;
  const std::size_t K = model.config().class_count;
  check_batch(model.config(), inputs);
  ProbabilityMatrix out(inputs.count, K);
  for (std::size_t start = 0; start < inputs.count; start += chunk) {
    const std::size_t n = std::min(chunk, inputs.count - start);
    SeriesBatch part(n, inputs.channels, inputs.length);
    std::copy_n(inputs.data.begin() + static_cast<std::ptrdiff_t>(start * inputs.instance_size()),
                n * inputs.instance_size(), part.data.begin());
    const auto p = forward(model, part);
    std::copy(p.data.begin(), p.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(start * K));
  }
  return out;
}

}  // namespace totopo
