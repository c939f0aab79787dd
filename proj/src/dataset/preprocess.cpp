#include <cmath>
#include <random>

#include "totopo/dataset.hpp"
#include "totopo/error.hpp"

namespace totopo {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TimeSeries znormalize(const TimeSeries& series) {
  std::vector<std::vector<double>> out;
  out.reserve(series.channel_count());
  for (std::size_t c = 0; c < series.channel_count(); ++c) {
    auto x = series.channel(c);
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> z(x.size(), 0.0);
    // Rounding in the mean leaves ~1e-16 relative residue on constant channels.
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
    }
    out.push_back(std::move(z));
  }
  return TimeSeries(std::move(out));
}

LabeledDataset znormalize(const LabeledDataset& dataset) {
  LabeledDataset out = dataset;
  for (auto& ts : out.instances) ts = znormalize(ts);
  return out;
}

double noise_std_for(double signal_power, double snr_db) {
  const double linear = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(signal_power / linear);
}

NoisyResult add_noise_snr(const TimeSeries& series, const NoiseSpec& spec) {
  if (!(spec.snr_db > 0.0) || !std::isfinite(spec.snr_db))
    throw ConfigError("snr_db must be a positive finite number of decibels");
  std::mt19937_64 rng(spec.seed);
  NoisyResult result;
  std::vector<std::vector<double>> out = series.channels();
  for (auto& ch : out) {
    double power = 0.0;
    for (double v : ch) power += v * v;
    power /= static_cast<double>(ch.size());
    if (power == 0.0) {
      result.zero_power_warning = true;
      continue;
    }
    std::normal_distribution<double> noise(0.0, noise_std_for(power, spec.snr_db));
    for (double& v : ch) v += noise(rng);
  }
  result.series = TimeSeries(std::move(out));
  return result;
}

LabeledDataset add_noise_snr(const LabeledDataset& dataset, const NoiseSpec& spec) {
  LabeledDataset out = dataset;
  for (std::size_t i = 0; i < out.instances.size(); ++i) {
    NoiseSpec per{spec.snr_db, mix_seed(spec.seed, i)};
    out.instances[i] = add_noise_snr(dataset.instances[i], per).series;
  }
  return out;
}

}  // namespace totopo
