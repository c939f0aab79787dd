#include "totopo/features.hpp"

#include <algorithm>
#include "json.hpp"

#include "text_util.hpp"
#include "totopo/error.hpp"

namespace totopo {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::ts: return "ts";
    case Family::betti: return "Betti";
    case Family::tda_feats: return "TDAFeats";
    case Family::l2norms: return "L2norms";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown descriptor family '" + std::string(name) + "'");
}

namespace {

std::vector<std::span<const double>> channel_views(const TimeSeries& ts) {
  std::vector<std::span<const double>> views;
  for (std::size_t c = 0; c < ts.channel_count(); ++c) views.push_back(ts.channel(c));
  return views;
}

L2NormConfig l2_config(const DescriptorConfig& cfg) {
  L2NormConfig l2 = cfg.l2;
  l2.d = cfg.embedding.window;
  return l2;
}

}  // namespace

InstanceDiagrams compute_diagrams(const TimeSeries& series, const DescriptorConfig& cfg) {
  InstanceDiagrams out;
  for (std::size_t c = 0; c < series.channel_count(); ++c) out.direct.push_back(sublevel_pd(series.channel(c)));
  out.rips = rips_pd(takens_embedding(channel_views(series), cfg.embedding), {1, std::nullopt});
  return out;
}

BettiRanges dataset_betti_ranges(const std::vector<InstanceDiagrams>& diagrams) {
  BettiRanges ranges;
  for (int dim = 0; dim < 2; ++dim) {
    auto& r = ranges[static_cast<std::size_t>(dim)];
    for (const auto& d : diagrams) {
      auto own = diagram_range(d.rips, dim);
      if (!own) continue;
      if (!r) {
        r = own;
      } else {
        r->first = std::min(r->first, own->first);
        r->second = std::max(r->second, own->second);
      }
    }
  }
  return ranges;
}

InstanceDescriptors compute_descriptors(const TimeSeries& series, const InstanceDiagrams& diagrams,
                                        const DescriptorConfig& cfg, const BettiRanges& ranges) {
  InstanceDescriptors out;

  std::vector<double> betti[2];
  for (int dim = 0; dim < 2; ++dim) {
    BettiConfig bc{cfg.betti_k, std::nullopt};
    if (cfg.betti_range == BettiRange::per_dataset) bc.range = ranges[static_cast<std::size_t>(dim)];
    const auto bs = betti_series(diagrams.rips, dim, bc);
    betti[dim].assign(bs.values.begin(), bs.values.end());
  }
  if (cfg.betti_layout == BettiLayout::separate_channels) {
    out.betti = {betti[0], betti[1]};
  } else {
    std::vector<double> mixed;
    for (std::size_t i = 0; i < cfg.betti_k; ++i) {
      mixed.push_back(betti[0][i]);
      mixed.push_back(betti[1][i]);
    }
    out.betti = {std::move(mixed)};
  }

  for (const auto& direct : diagrams.direct) {
    const auto v = summarize_pd(direct, 0, cfg.summary).values();
    out.tda_feats.insert(out.tda_feats.end(), v.begin(), v.end());
  }
  for (int dim = 0; dim < 2; ++dim) {
    const auto v = summarize_pd(diagrams.rips, dim, cfg.summary).values();
    out.tda_feats.insert(out.tda_feats.end(), v.begin(), v.end());
  }

  const auto l2 = l2_norm_series(channel_views(series), l2_config(cfg));
  out.l2norms.push_back(l2.values);
  if (!l2.values_dim0.empty()) out.l2norms.push_back(l2.values_dim0);
  return out;
}

std::vector<InstanceDiagrams> compute_all_diagrams(const LabeledDataset& dataset, const DescriptorConfig& cfg) {
  std::vector<InstanceDiagrams> out;
  out.reserve(dataset.size());
  for (const auto& ts : dataset.instances) out.push_back(compute_diagrams(ts, cfg));
  return out;
}

const SeriesBatch& DatasetDescriptors::of(Family f) const {
  switch (f) {
    case Family::ts: return ts;
    case Family::betti: return betti;
    case Family::tda_feats: return tda_feats;
    case Family::l2norms: return l2norms;
  }
  throw ConfigError("unknown family");
}

namespace {

SeriesBatch stack(const std::vector<std::vector<std::vector<double>>>& per_instance) {
  const auto& first = per_instance.front();
  SeriesBatch b(per_instance.size(), first.size(), first.front().size());
  for (std::size_t i = 0; i < per_instance.size(); ++i) {
    if (per_instance[i].size() != b.channels) throw ShapeError("descriptor channel counts differ across instances");
    for (std::size_t c = 0; c < b.channels; ++c) {
      if (per_instance[i][c].size() != b.length) throw ShapeError("descriptor lengths differ across instances");
      std::copy(per_instance[i][c].begin(), per_instance[i][c].end(), b.data.begin() + static_cast<std::ptrdiff_t>((i * b.channels + c) * b.length));
    }
  }
  return b;
}

}  // namespace

DatasetDescriptors extract_descriptors(const LabeledDataset& dataset, const DescriptorConfig& cfg,
                                       const std::vector<InstanceDiagrams>& diagrams, const BettiRanges& ranges) {
  if (dataset.size() == 0) throw ShapeError("cannot extract descriptors from an empty dataset");
  if (diagrams.size() != dataset.size()) throw ContractError("one set of diagrams per instance is required");
  std::vector<std::vector<std::vector<double>>> ts, betti, tda, l2;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& series = dataset.instances[i];
    ts.push_back(series.channels());
    auto d = compute_descriptors(series, diagrams[i], cfg, ranges);
    betti.push_back(std::move(d.betti));
    tda.push_back({std::move(d.tda_feats)});
    l2.push_back(std::move(d.l2norms));
  }
  return {stack(ts), stack(betti), stack(tda), stack(l2)};
}

std::string format_descriptor_csv(const LabeledDataset& dataset, const DatasetDescriptors& descriptors) {
  std::string out = "instance,label,family,values...\n";
  for (Family f : {Family::betti, Family::tda_feats, Family::l2norms}) {
    const auto& b = descriptors.of(f);
    for (std::size_t i = 0; i < b.count; ++i) {
      out += std::to_string(i) + "," + std::to_string(dataset.labels.at(i)) + "," + std::string(family_name(f));
      for (double v : b.instance(i)) {
        out += ',';
        out += detail::format_real(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string descriptor_manifest_json(const DescriptorConfig& cfg, const DatasetDescriptors& descriptors) {
  nlohmann::json j;
  j["format"] = "totopo-descriptors";
  j["version"] = 1;
  j["embedding"] = {{"d", cfg.embedding.window}, {"stride", cfg.embedding.stride}, {"delay", cfg.embedding.delay}};
  j["summary"] = {{"ratio", cfg.summary.ratio},
                  {"order", "per direct channel (count,max,relevant,mean,sum), then rips dim 0, rips dim 1"}};
  j["betti"] = {{"k", cfg.betti_k},
                {"alive", "birth <= r < death"},
                {"layout", cfg.betti_layout == BettiLayout::separate_channels ? "separate" : "interleaved"},
                {"range", cfg.betti_range == BettiRange::per_diagram ? "per_diagram" : "per_dataset"}};
  j["l2norms"] = {{"d", cfg.embedding.window},
                  {"W", cfg.l2.W},
                  {"stride_W", cfg.l2.stride_W},
                  {"include_dim0", cfg.l2.include_dim0},
                  {"level_count", cfg.l2.landscape.level_count},
                  {"grid_size", cfg.l2.landscape.grid_size}};
  j["conventions"] = {{"essential_classes", "capped: direct at global max, rips at max pairwise distance"},
                      {"empty_diagram", "zeros"},
                      {"zero_length_h1", "dropped"}};
  for (Family f : kAllFamilies) {
    const auto& b = descriptors.of(f);
    j["shapes"][std::string(family_name(f))] = {b.count, b.channels, b.length};
  }
  return j.dump(2);
}

}  // namespace totopo
