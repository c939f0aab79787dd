#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace totopo {

// A (possibly multivariate) time series. All channels share one length.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<std::vector<double>> channels);
  static TimeSeries univariate(std::vector<double> values);

  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t length() const noexcept { return channels_.empty() ? 0 : channels_.front().size(); }

  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  std::span<double> channel(std::size_t c) { return channels_.at(c); }
  const std::vector<std::vector<double>>& channels() const noexcept { return channels_; }

  bool operator==(const TimeSeries&) const = default;

 private:
  std::vector<std::vector<double>> channels_;
};

enum class Split { train, test };

const char* to_string(Split split);

struct LabeledDataset {
  std::vector<TimeSeries> instances;
  std::vector<int> labels;  // contiguous 0..class_count-1
  Split split = Split::train;
  int class_count = 0;
  // class_names[k] is the label text that class k was read from.
  std::vector<std::string> class_names;
  std::string name;

  std::size_t size() const noexcept { return instances.size(); }
  std::size_t length() const noexcept { return instances.empty() ? 0 : instances.front().length(); }
  std::size_t channel_count() const noexcept {
    return instances.empty() ? 0 : instances.front().channel_count();
  }

  // Throws ContractError when the invariants (matching sizes, label range,
  // uniform shape, one instance per class for training splits) do not hold.
  void validate() const;
};

enum class FileFormat { csv, ts };

// Picks the format from the file extension (".ts" or anything else -> csv).
FileFormat format_from_path(const std::filesystem::path& path);

// Reads a dataset, remapping labels onto 0..C-1. Label texts are ordered
// numerically when they all parse as numbers, lexicographically otherwise.
//
// CSV layout, univariate: one instance per row, `label,x0,x1,...`.
// CSV layout, multivariate: first line is the header `instance,label,values...`
// and every following row is `instance_id,label,x0,x1,...`; consecutive rows
// sharing an instance id are that instance's channels.
// Lines starting with '#' and blank lines are skipped in both layouts.
LabeledDataset load_dataset(const std::filesystem::path& path, FileFormat format,
                            Split split = Split::train);
LabeledDataset load_dataset(const std::filesystem::path& path, Split split = Split::train);

LabeledDataset parse_csv(std::string_view text, Split split = Split::train);
LabeledDataset parse_ts(std::string_view text, Split split = Split::train);

// Writes in the CSV layout above (multivariate header only when needed), reals
// with 17 significant digits so that parsing the result is bit-exact.
std::string format_csv(const LabeledDataset& dataset);
void save_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

// Remaps `other` onto `reference`'s class names. Throws ContractError when
// `other` carries a class the reference does not know.
LabeledDataset align_labels(const LabeledDataset& reference, const LabeledDataset& other);

// Per channel: subtract the mean, divide by the population standard deviation.
// Constant channels become all zeros.
TimeSeries znormalize(const TimeSeries& series);
LabeledDataset znormalize(const LabeledDataset& dataset);

struct NoiseSpec {
  double snr_db = 20.0;
  std::uint64_t seed = 0;
};

struct NoisyResult {
  TimeSeries series;
  // Set when at least one channel had zero power and was left unchanged.
  bool zero_power_warning = false;
};

// Adds white Gaussian noise with variance P / 10^(snr_db/10) per channel, P
// being the channel's mean squared value.
NoisyResult add_noise_snr(const TimeSeries& series, const NoiseSpec& spec);

// Applies add_noise_snr to every instance with a per-instance seed derived
// from spec.seed and the instance index.
LabeledDataset add_noise_snr(const LabeledDataset& dataset, const NoiseSpec& spec);

double noise_std_for(double signal_power, double snr_db);

enum class GeneratorKind { sine, chirp, white_noise };

// One class of the synthetic data. Frequencies are in cycles per series.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::sine;
  double freq = 5.0;
  double freq_end = 10.0;              // chirp only
  double phase_jitter = 3.14159265358979323846;  // phase ~ U(-jitter, jitter)
  double noise_std = 0.1;              // additive Gaussian noise on sine and chirp
};

// Parses "sine:5", "sine:5:0.5" (freq, phase jitter), "chirp:2:10",
// "noise" / "white-noise". Throws ConfigError for unknown generators.
GeneratorSpec parse_generator(std::string_view text);
std::string to_string(const GeneratorSpec& spec);

LabeledDataset synthesize_dataset(const std::vector<GeneratorSpec>& classes, int n_per_class,
                                  int length, std::uint64_t seed, Split split = Split::train);

// Deterministic seed mixing (splitmix64).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace totopo
