#include <cmath>
#include <numbers>
#include <random>

#include "text_util.hpp"
#include "totopo/dataset.hpp"
#include "totopo/error.hpp"

namespace totopo {

GeneratorSpec parse_generator(std::string_view text) {
  auto parts = detail::split(detail::trim(text), ':');
  const std::string kind(detail::trim(parts.front()));
  auto number = [&](std::size_t i, double fallback) {
    if (i >= parts.size()) return fallback;
    auto v = detail::parse_real(detail::trim(parts[i]));
    if (!v) throw ConfigError("bad numeric argument in generator '" + std::string(text) + "'");
    return *v;
  };
  GeneratorSpec spec;
  if (kind == "sine") {
    spec.kind = GeneratorKind::sine;
    spec.freq = number(1, 5.0);
    spec.phase_jitter = number(2, std::numbers::pi);
    if (parts.size() > 3) throw ConfigError("sine takes at most freq and phase jitter");
  } else if (kind == "chirp") {
    spec.kind = GeneratorKind::chirp;
    spec.freq = number(1, 2.0);
    spec.freq_end = number(2, 10.0);
    if (parts.size() > 3) throw ConfigError("chirp takes at most start and end frequency");
  } else if (kind == "noise" || kind == "white-noise" || kind == "white_noise") {
    spec.kind = GeneratorKind::white_noise;
    if (parts.size() > 1) throw ConfigError("white noise takes no arguments");
  } else {
    throw ConfigError("unknown generator '" + kind + "'");
  }
  return spec;
}

std::string to_string(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::sine:
      return "sine:" + detail::format_real(spec.freq) + ":" + detail::format_real(spec.phase_jitter);
    case GeneratorKind::chirp:
      return "chirp:" + detail::format_real(spec.freq) + ":" + detail::format_real(spec.freq_end);
    case GeneratorKind::white_noise:
      return "noise";
  }
  return "?";
}

namespace {

std::vector<double> generate(const GeneratorSpec& spec, int length, std::mt19937_64& rng) {
  const double n = static_cast<double>(length);
  std::vector<double> x(static_cast<std::size_t>(length));
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (spec.kind == GeneratorKind::white_noise) {
    for (double& v : x) v = gauss(rng);
    return x;
  }
  std::uniform_real_distribution<double> phase_dist(-spec.phase_jitter, spec.phase_jitter);
  const double phase = spec.phase_jitter > 0 ? phase_dist(rng) : 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int t = 0; t < length; ++t) {
    const double u = t / n;
    double angle = 0.0;
    if (spec.kind == GeneratorKind::sine) {
      angle = two_pi * spec.freq * u;
    } else {
      angle = two_pi * (spec.freq * u + 0.5 * (spec.freq_end - spec.freq) * u * u);
    }
    x[static_cast<std::size_t>(t)] = std::sin(angle + phase);
  }
  if (spec.noise_std > 0) {
    for (double& v : x) v += spec.noise_std * gauss(rng);
  }
  return x;
}

}  // namespace

LabeledDataset synthesize_dataset(const std::vector<GeneratorSpec>& classes, int n_per_class,
                                  int length, std::uint64_t seed, Split split) {
  if (classes.empty()) throw ConfigError("at least one generator class is required");
  if (n_per_class < 1) throw ConfigError("n_per_class must be at least 1");
  if (length < 16) throw ConfigError("synthetic series length must be at least 16");
  LabeledDataset ds;
  ds.split = split;
  ds.class_count = static_cast<int>(classes.size());
  ds.name = "synthetic";
  for (std::size_t k = 0; k < classes.size(); ++k) ds.class_names.push_back(std::to_string(k));
  // Interleave classes so that any prefix of the dataset is roughly balanced.
  for (int i = 0; i < n_per_class; ++i) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      std::mt19937_64 rng(mix_seed(seed, ds.instances.size()));
      ds.instances.push_back(TimeSeries::univariate(generate(classes[k], length, rng)));
      ds.labels.push_back(static_cast<int>(k));
    }
  }
  return ds;
}

}  // namespace totopo
