#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace totopo {

// Dense [count x channels x length] block of doubles, row-major.
struct SeriesBatch {
  std::size_t count = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> data;

  SeriesBatch() = default;
  SeriesBatch(std::size_t n, std::size_t c, std::size_t l) : count(n), channels(c), length(l), data(n * c * l, 0.0) {}

  std::size_t instance_size() const noexcept { return channels * length; }
  std::span<double> instance(std::size_t i) { return {data.data() + i * instance_size(), instance_size()}; }
  std::span<const double> instance(std::size_t i) const { return {data.data() + i * instance_size(), instance_size()}; }
  double& at(std::size_t i, std::size_t c, std::size_t t) { return data[(i * channels + c) * length + t]; }
  double at(std::size_t i, std::size_t c, std::size_t t) const { return data[(i * channels + c) * length + t]; }

  bool operator==(const SeriesBatch&) const = default;
};

// Row-per-instance class probabilities.
struct ProbabilityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ProbabilityMatrix() = default;
  ProbabilityMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  bool operator==(const ProbabilityMatrix&) const = default;
};

}  // namespace totopo
