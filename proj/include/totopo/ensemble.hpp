#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "totopo/tensor.hpp"

namespace totopo {

// model name -> vote in [1, k], each vote used once.
using EnsembleVotes = std::map<std::string, int>;

// Lowest loss gets vote k, highest gets 1. Equal losses are ordered by model
// name, so the lexicographically smaller name ranks first. Non-finite losses
// are a ContractError.
EnsembleVotes rank_models(const std::map<std::string, double>& losses);

struct CombinedPrediction {
  ProbabilityMatrix weighted;          // sum of vote * probabilities
  std::vector<int> predicted_classes;  // row argmax, ties to the lowest class index
};

using NamedPredictions = std::vector<std::pair<std::string, ProbabilityMatrix>>;

// Accumulates in sorted-name order, so the input order never matters.
CombinedPrediction combine(const NamedPredictions& predictions, const EnsembleVotes& votes);

int argmax_row(std::span<const double> row);

std::string ensemble_manifest_json(const std::map<std::string, double>& losses, const EnsembleVotes& votes,
                                   const CombinedPrediction& combined);

}  // namespace totopo
