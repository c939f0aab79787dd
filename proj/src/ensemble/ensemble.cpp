#include "totopo/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "totopo/error.hpp"

namespace totopo {

EnsembleVotes rank_models(const std::map<std::string, double>& losses) {
  if (losses.empty()) throw ContractError("cannot rank an empty set of models");
  std::vector<std::pair<double, std::string>> order;
  for (const auto& [name, loss] : losses) {
    if (!std::isfinite(loss)) throw ContractError("model '" + name + "' has a non-finite training loss");
    order.emplace_back(loss, name);
  }
  std::sort(order.begin(), order.end());
  EnsembleVotes votes;
  int vote = static_cast<int>(order.size());
  for (const auto& entry : order) votes[entry.second] = vote--;
  return votes;
}

int argmax_row(std::span<const double> row) {
  if (row.empty()) throw ContractError("argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c)
    if (row[c] > row[best]) best = c;
  return static_cast<int>(best);
}

CombinedPrediction combine(const NamedPredictions& predictions, const EnsembleVotes& votes) {
  if (predictions.empty()) throw ContractError("nothing to combine");
  std::map<std::string, const ProbabilityMatrix*> by_name;
  for (const auto& [name, p] : predictions) {
    if (!by_name.emplace(name, &p).second) throw ContractError("duplicate model '" + name + "'");
  }
  if (by_name.size() != votes.size()) throw ContractError("predictions and votes name different models");
  std::set<int> used;
  for (const auto& [name, vote] : votes) {
    if (!by_name.count(name)) throw ContractError("no predictions for model '" + name + "'");
    if (vote < 1 || vote > static_cast<int>(votes.size()) || !used.insert(vote).second)
      throw ContractError("votes must be exactly 1..k");
  }
  const auto& first = *by_name.begin()->second;
  CombinedPrediction out;
  out.weighted = ProbabilityMatrix(first.rows, first.cols);
  for (const auto& [name, p] : by_name) {
    if (p->rows != first.rows || p->cols != first.cols)
      throw ContractError("model '" + name + "' has a different prediction shape");
    const double w = votes.at(name);
    for (std::size_t i = 0; i < p->data.size(); ++i) out.weighted.data[i] += p->data[i] * w;
  }
  out.predicted_classes.reserve(first.rows);
  for (std::size_t r = 0; r < first.rows; ++r) out.predicted_classes.push_back(argmax_row(out.weighted.row(r)));
  return out;
}

std::string ensemble_manifest_json(const std::map<std::string, double>& losses, const EnsembleVotes& votes,
                                   const CombinedPrediction& combined) {
  nlohmann::json j;
  j["format"] = "totopo-ensemble";
  j["version"] = 1;
  j["ranking"] = "final-epoch training loss, ascending; ties by model name";
  j["argmax_ties"] = "lowest class index";
  for (const auto& [name, loss] : losses) {
    j["models"][name] = {{"loss", loss}, {"vote", votes.count(name) ? votes.at(name) : 0}};
  }
  auto& rows = j["combined"];
  rows = nlohmann::json::array();
  for (std::size_t r = 0; r < combined.weighted.rows; ++r) {
    const auto row = combined.weighted.row(r);
    rows.push_back({{"weighted", std::vector<double>(row.begin(), row.end())},
                    {"predicted", combined.predicted_classes[r]}});
  }
  return j.dump(2);
}

}  // namespace totopo
