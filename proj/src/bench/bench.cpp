#include "totopo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "json.hpp"
#include "text_util.hpp"
#include "totopo/baselines.hpp"
#include "totopo/error.hpp"

namespace totopo {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- configuration ----

namespace {

json descriptors_json(const DescriptorConfig& d) {
  json j;
  j["d"] = d.embedding.window;
  j["stride"] = d.embedding.stride;
  j["delay"] = d.embedding.delay;
  j["ratio"] = d.summary.ratio;
  j["k"] = d.betti_k;
  j["betti_layout"] = d.betti_layout == BettiLayout::separate_channels ? "separate" : "interleaved";
  j["betti_range"] = d.betti_range == BettiRange::per_diagram ? "per_diagram" : "per_dataset";
  j["W"] = d.l2.W;
  j["stride_W"] = d.l2.stride_W;
  j["include_dim0"] = d.l2.include_dim0;
  j["level_count"] = d.l2.landscape.level_count;
  j["grid_size"] = d.l2.landscape.grid_size;
  return j;
}

DescriptorConfig descriptors_from(const json& j) {
  DescriptorConfig d;
  d.embedding.window = j.value("d", d.embedding.window);
  d.embedding.stride = j.value("stride", d.embedding.stride);
  d.embedding.delay = j.value("delay", d.embedding.delay);
  d.summary.ratio = j.value("ratio", d.summary.ratio);
  d.betti_k = j.value("k", d.betti_k);
  const auto layout = j.value("betti_layout", std::string("separate"));
  if (layout != "separate" && layout != "interleaved") throw ConfigError("betti_layout must be separate or interleaved");
  d.betti_layout = layout == "separate" ? BettiLayout::separate_channels : BettiLayout::interleaved;
  const auto range = j.value("betti_range", std::string("per_diagram"));
  if (range != "per_diagram" && range != "per_dataset") throw ConfigError("betti_range must be per_diagram or per_dataset");
  d.betti_range = range == "per_diagram" ? BettiRange::per_diagram : BettiRange::per_dataset;
  d.l2.W = j.value("W", d.l2.W);
  d.l2.stride_W = j.value("stride_W", d.l2.stride_W);
  d.l2.include_dim0 = j.value("include_dim0", d.l2.include_dim0);
  d.l2.landscape.level_count = j.value("level_count", d.l2.landscape.level_count);
  d.l2.landscape.grid_size = j.value("grid_size", d.l2.landscape.grid_size);
  d.l2.d = d.embedding.window;
  if (d.embedding.window == 0 || d.embedding.stride == 0 || d.embedding.delay == 0)
    throw ConfigError("embedding d, stride and delay must be positive");
  if (d.betti_k == 0) throw ConfigError("betti k must be positive");
  if (!(d.summary.ratio > 0.0 && d.summary.ratio < 1.0)) throw ConfigError("ratio must lie in (0, 1)");
  if (d.l2.W == 0 || d.l2.stride_W == 0) throw ConfigError("W and stride_W must be positive");
  return d;
}

json learner_json(const ConvNetConfig& c) {
  json j;
  for (const auto& b : c.blocks) {
    j["channels"].push_back(b.channels);
    j["kernels"].push_back(b.kernel);
  }
  j["leaky_relu_alpha"] = c.leaky_relu_alpha;
  j["dropout_rate"] = c.dropout_rate;
  j["dropout_after"] = c.dropout_after;
  j["optimizer"] = c.optimizer.kind == OptimizerSpec::Kind::adam ? "adam" : "sgd";
  j["learning_rate"] = c.optimizer.learning_rate;
  j["epochs"] = c.optimizer.epochs;
  j["batch_size"] = c.optimizer.batch_size;
  return j;
}

ConvNetConfig learner_from(const json& j) {
  ConvNetConfig c;
  if (j.contains("channels")) {
    const auto v = j.at("channels").get<std::vector<std::size_t>>();
    if (v.size() != 3) throw ConfigError("learner.channels needs three entries");
    for (std::size_t b = 0; b < 3; ++b) c.blocks[b].channels = v[b];
  }
  if (j.contains("kernels")) {
    const auto v = j.at("kernels").get<std::vector<std::size_t>>();
    if (v.size() != 3) throw ConfigError("learner.kernels needs three entries");
    for (std::size_t b = 0; b < 3; ++b) c.blocks[b].kernel = v[b];
  }
  c.leaky_relu_alpha = j.value("leaky_relu_alpha", c.leaky_relu_alpha);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  if (j.contains("dropout_after")) c.dropout_after = j.at("dropout_after").get<std::array<bool, 3>>();
  const auto kind = j.value("optimizer", std::string("adam"));
  if (kind != "adam" && kind != "sgd") throw ConfigError("optimizer must be adam or sgd");
  c.optimizer.kind = kind == "adam" ? OptimizerSpec::Kind::adam : OptimizerSpec::Kind::sgd;
  c.optimizer.learning_rate = j.value("learning_rate", c.optimizer.learning_rate);
  c.optimizer.epochs = j.value("epochs", c.optimizer.epochs);
  c.optimizer.batch_size = j.value("batch_size", c.optimizer.batch_size);
  // Shapes are placeholders until a learner is built for a concrete input.
  ConvNetConfig probe = c;
  probe.class_count = 2;
  probe.validate();
  return c;
}

json run_config_json(const RunConfig& cfg, bool with_output) {
  json j;
  j["datasets"] = cfg.datasets;
  j["synthetic"] = json::array();
  for (const auto& s : cfg.synthetic) {
    j["synthetic"].push_back({{"name", s.name},
                              {"generators", s.generators},
                              {"n_train", s.n_train},
                              {"n_test", s.n_test},
                              {"length", s.length},
                              {"seed", s.seed}});
  }
  j["descriptors"] = descriptors_json(cfg.descriptors);
  j["learner"] = learner_json(cfg.learner);
  j["normalize"] = cfg.normalize;
  j["noise_levels"] = cfg.noise_levels;
  j["baselines"] = {{"euclidean", cfg.baseline_euclidean}, {"dtw", cfg.baseline_dtw}};
  j["baselines"]["dtw_window"] = cfg.dtw_window ? json(*cfg.dtw_window) : json(nullptr);
  j["ranking"] = cfg.ranking == Ranking::train_loss ? "train_loss" : "validation_loss";
  j["validation_fraction"] = cfg.validation_fraction;
  j["parallel_learners"] = cfg.parallel_learners;
  j["seed"] = cfg.seed;
  if (with_output) j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace

std::string run_config_to_json(const RunConfig& cfg) { return run_config_json(cfg, true).dump(2); }

RunConfig run_config_from_json(const std::string& text) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
    cfg.datasets = j.value("datasets", cfg.datasets);
    if (j.contains("synthetic")) {
      for (const auto& s : j.at("synthetic")) {
        SyntheticSpec spec;
        spec.name = s.value("name", spec.name);
        spec.generators = s.value("generators", spec.generators);
        spec.n_train = s.value("n_train", spec.n_train);
        spec.n_test = s.value("n_test", spec.n_test);
        spec.length = s.value("length", spec.length);
        spec.seed = s.value("seed", spec.seed);
        cfg.synthetic.push_back(spec);
      }
    }
    if (j.contains("descriptors")) cfg.descriptors = descriptors_from(j.at("descriptors"));
    if (j.contains("learner")) cfg.learner = learner_from(j.at("learner"));
    cfg.normalize = j.value("normalize", cfg.normalize);
    cfg.noise_levels = j.value("noise_levels", cfg.noise_levels);
    for (int level : cfg.noise_levels) snr_for_level(level);
    if (j.contains("baselines")) {
      const auto& b = j.at("baselines");
      cfg.baseline_euclidean = b.value("euclidean", cfg.baseline_euclidean);
      cfg.baseline_dtw = b.value("dtw", cfg.baseline_dtw);
      if (b.contains("dtw_window") && !b.at("dtw_window").is_null())
        cfg.dtw_window = b.at("dtw_window").get<std::size_t>();
    }
    const auto ranking = j.value("ranking", std::string("train_loss"));
    if (ranking != "train_loss" && ranking != "validation_loss")
      throw ConfigError("ranking must be train_loss or validation_loss");
    cfg.ranking = ranking == "train_loss" ? Ranking::train_loss : Ranking::validation_loss;
    cfg.validation_fraction = j.value("validation_fraction", cfg.validation_fraction);
    if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0))
      throw ConfigError("validation_fraction must lie in (0, 1)");
    cfg.parallel_learners = j.value("parallel_learners", cfg.parallel_learners);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run configuration: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = run_config_json(cfg, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<double> snr_for_level(int level) {
  switch (level) {
    case 0: return std::nullopt;
    case 1: return 20.0;
    case 2: return 15.0;
    case 3: return 10.0;
  }
  throw ConfigError("noise level must be 0, 1, 2 or 3, got " + std::to_string(level));
}

// ---- datasets ----

NamedDataset make_synthetic(const SyntheticSpec& spec) {
  std::vector<GeneratorSpec> gens;
  for (const auto& g : spec.generators) gens.push_back(parse_generator(g));
  const int classes = static_cast<int>(gens.size());
  if (spec.n_train < classes || spec.n_test < 1) throw ConfigError("synthetic splits are too small for the class count");
  // Classes are interleaved, so the first n instances are as balanced as possible.
  auto make = [&](int n, std::uint64_t seed, Split split) {
    auto ds = synthesize_dataset(gens, (n + classes - 1) / classes, spec.length, seed, split);
    ds.instances.resize(static_cast<std::size_t>(n));
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.name = spec.name;
    return ds;
  };
  NamedDataset d;
  d.name = spec.name;
  d.train = make(spec.n_train, spec.seed, Split::train);
  d.test = make(spec.n_test, mix_seed(spec.seed, 0x7E57), Split::test);
  return d;
}

namespace {

NamedDataset load_pair(const fs::path& train_path) {
  const std::string file = train_path.filename().string();
  const auto at = file.rfind("_TRAIN");
  if (at == std::string::npos) throw ConfigError("dataset file '" + file + "' has no _TRAIN suffix");
  const fs::path test_path = train_path.parent_path() / (file.substr(0, at) + "_TEST" + file.substr(at + 6));
  if (!fs::exists(test_path)) throw ConfigError("missing test split " + test_path.string());
  NamedDataset d;
  d.train = load_dataset(train_path, Split::train);
  d.test = align_labels(d.train, load_dataset(test_path, Split::test));
  d.name = d.train.name.empty() ? file.substr(0, at) : d.train.name;
  return d;
}

}  // namespace

std::vector<NamedDataset> load_datasets(const RunConfig& cfg) {
  std::vector<NamedDataset> out;
  for (const auto& entry : cfg.datasets) {
    const fs::path p(entry);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& f : fs::directory_iterator(p)) {
        const auto name = f.path().filename().string();
        const auto ext = f.path().extension().string();
        if (f.is_regular_file() && name.find("_TRAIN") != std::string::npos && (ext == ".ts" || ext == ".csv"))
          found.push_back(f.path());
      }
      std::sort(found.begin(), found.end());
      for (const auto& f : found) out.push_back(load_pair(f));
    } else if (fs::exists(p)) {
      out.push_back(load_pair(p));
    } else {
      throw ConfigError("dataset path '" + entry + "' does not exist");
    }
  }
  for (const auto& s : cfg.synthetic) out.push_back(make_synthetic(s));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].name == out[i - 1].name) throw ConfigError("dataset name '" + out[i].name + "' appears twice");
  return out;
}

// ---- pipeline ----

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

SeriesBatch select(const SeriesBatch& b, const std::vector<std::size_t>& rows) {
  SeriesBatch out(rows.size(), b.channels, b.length);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = b.instance(rows[k]);
    std::copy(src.begin(), src.end(), out.instance(k).begin());
  }
  return out;
}

// Every n-th instance of each class, keeping at least one per class for training.
std::vector<char> validation_mask(std::span<const int> labels, int classes, double fraction) {
  std::vector<char> held(labels.size(), 0);
  const auto stride = static_cast<std::size_t>(std::max(2.0, std::round(1.0 / fraction)));
  for (int k = 0; k < classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == k) members.push_back(i);
    if (members.size() < 2) continue;
    for (std::size_t m = 0; m < members.size(); m += stride) held[members[m]] = 1;
  }
  return held;
}

struct Fitted {
  std::string name;
  std::optional<FeatureScaler> scaler;
  ConvNetModel model;
  TrainReport report;
  double ranking_loss = 0.0;
};

Fitted fit_learner(const RunConfig& cfg, Family family, const SeriesBatch& raw, std::span<const int> labels,
                   int classes) {
  Fitted f;
  f.name = std::string(family_name(family));
  SeriesBatch inputs = raw;
  if (family != Family::ts) {
    f.scaler = FeatureScaler::fit(raw);
    inputs = f.scaler->apply(raw);
  }
  ConvNetConfig lc = cfg.learner;
  lc.class_count = static_cast<std::size_t>(classes);
  lc.input_channels = inputs.channels;
  lc.input_length = inputs.length;
  lc.seed = mix_seed(cfg.seed, 1 + static_cast<std::uint64_t>(family));
  f.model = init_model(lc);

  if (cfg.ranking == Ranking::train_loss) {
    f.report = train(f.model, inputs, labels, f.name);
    f.ranking_loss = f.report.final_train_loss;
    return f;
  }
  const auto held = validation_mask(labels, classes, cfg.validation_fraction);
  std::vector<std::size_t> fit_rows, val_rows;
  std::vector<int> fit_y, val_y;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (held[i] ? val_rows : fit_rows).push_back(i);
    (held[i] ? val_y : fit_y).push_back(labels[i]);
  }
  if (val_rows.empty()) throw ContractError("training split too small for a validation hold-out");
  f.report = train(f.model, select(inputs, fit_rows), fit_y, f.name);
  f.ranking_loss = batch_loss(f.model, select(inputs, val_rows), val_y);
  return f;
}

LabeledDataset prepared(const RunConfig& cfg, const LabeledDataset& d) {
  return cfg.normalize ? znormalize(d) : d;
}

}  // namespace

TotopoModel TotopoModel::fit(const RunConfig& cfg, const LabeledDataset& train_split) {
  if (train_split.size() == 0) throw ContractError("train split is empty");
  std::set<int> classes(train_split.labels.begin(), train_split.labels.end());
  if (train_split.class_count < 2 || classes.size() < 2)
    throw ContractError("train split needs at least two classes, found " + std::to_string(classes.size()));
  train_split.validate();

  TotopoModel m;
  m.cfg_ = cfg;
  m.cfg_.descriptors.l2.d = cfg.descriptors.embedding.window;
  m.channels_ = train_split.channel_count();
  m.length_ = train_split.length();
  m.class_count_ = train_split.class_count;

  const auto data = stage("normalize", [&] { return prepared(m.cfg_, train_split); });
  const auto diagrams = stage("diagrams", [&] { return compute_all_diagrams(data, m.cfg_.descriptors); });
  const auto desc = stage("descriptors", [&] {
    m.ranges_ = dataset_betti_ranges(diagrams);
    return extract_descriptors(data, m.cfg_.descriptors, diagrams, m.ranges_);
  });
  m.descriptor_manifest_ = descriptor_manifest_json(m.cfg_.descriptors, desc);

  stage("learners", [&] {
    std::vector<Fitted> fitted;
    if (cfg.parallel_learners) {
      std::vector<std::future<Fitted>> jobs;
      for (Family f : kAllFamilies)
        jobs.push_back(std::async(std::launch::async, [&, f] {
          return fit_learner(m.cfg_, f, desc.of(f), data.labels, data.class_count);
        }));
      for (auto& j : jobs) fitted.push_back(j.get());
    } else {
      for (Family f : kAllFamilies) fitted.push_back(fit_learner(m.cfg_, f, desc.of(f), data.labels, data.class_count));
    }
    for (auto& f : fitted) {
      if (f.scaler) m.scalers_.emplace(f.name, *f.scaler);
      m.losses_[f.name] = f.ranking_loss;
      m.reports_[f.name] = f.report;
      m.models_.emplace(f.name, std::move(f.model));
    }
    return 0;
  });
  m.votes_ = stage("ensemble", [&] { return rank_models(m.losses_); });
  return m;
}

TotopoPrediction TotopoModel::predict(const LabeledDataset& test) const {
  if (test.size() == 0) throw ContractError("test split is empty");
  if (test.channel_count() != channels_ || test.length() != length_)
    throw ShapeError("test split shape differs from the training split");
  const auto data = stage("normalize", [&] { return prepared(cfg_, test); });
  const auto diagrams = stage("diagrams", [&] { return compute_all_diagrams(data, cfg_.descriptors); });
  const auto desc = stage("descriptors", [&] { return extract_descriptors(data, cfg_.descriptors, diagrams, ranges_); });
  TotopoPrediction out;
  stage("learners", [&] {
    for (Family f : kAllFamilies) {
      const std::string name(family_name(f));
      const auto it = scalers_.find(name);
      const SeriesBatch inputs = it == scalers_.end() ? desc.of(f) : it->second.apply(desc.of(f));
      out.per_model.emplace(name, predict_proba(models_.at(name), inputs));
    }
    return 0;
  });
  out.combined = stage("ensemble", [&] {
    NamedPredictions preds(out.per_model.begin(), out.per_model.end());
    return combine(preds, votes_);
  });
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

std::vector<int> argmax_rows(const ProbabilityMatrix& p) {
  std::vector<int> out;
  for (std::size_t r = 0; r < p.rows; ++r) out.push_back(argmax_row(p.row(r)));
  return out;
}

}  // namespace

TotopoResult run_totopo(const RunConfig& cfg, const LabeledDataset& train_split, const LabeledDataset& test,
                        const std::optional<fs::path>& artifacts) {
  const auto model = TotopoModel::fit(cfg, train_split);
  const auto pred = model.predict(test);
  TotopoResult r;
  r.predicted = pred.combined.predicted_classes;
  r.accuracy = accuracy(r.predicted, test.labels);
  for (const auto& [name, p] : pred.per_model) {
    r.learner_predicted[name] = argmax_rows(p);
    r.learner_accuracy[name] = accuracy(r.learner_predicted[name], test.labels);
  }
  r.ranking_losses = model.ranking_losses();
  r.votes = model.votes();

  if (artifacts) {
    stage("artifacts", [&] {
      fs::create_directories(*artifacts);
      const std::string hash = config_hash(cfg);
      write_text(*artifacts / "descriptors.json", model.descriptor_manifest());
      write_text(*artifacts / "ensemble.json",
                 ensemble_manifest_json(model.ranking_losses(), model.votes(), pred.combined));
      json learners;
      for (const auto& [name, m] : model.models()) {
        learners[name] = {{"config", json::parse(config_to_json(m.config()))},
                          {"report", json::parse(report_to_json(model.reports().at(name)))},
                          {"test_accuracy", r.learner_accuracy.at(name)}};
      }
      write_text(*artifacts / "learners.json", learners.dump(2));
      json run;
      run["config_hash"] = hash;
      run["config"] = run_config_json(cfg, false);
      run["train_size"] = train_split.size();
      run["test_size"] = test.size();
      run["class_names"] = train_split.class_names;
      run["accuracy"] = r.accuracy;
      run["ranking_source"] = cfg.ranking == Ranking::train_loss ? "final-epoch training loss" : "validation loss";
      write_text(*artifacts / "run.json", run.dump(2));

      std::string csv = "# config_hash=" + hash + "\ninstance,label";
      for (const auto& [name, p] : pred.per_model) csv += "," + name;
      csv += std::string(",") + kTotopo + "\n";
      for (std::size_t i = 0; i < test.size(); ++i) {
        csv += std::to_string(i) + "," + std::to_string(test.labels[i]);
        for (const auto& [name, p] : pred.per_model) csv += "," + std::to_string(r.learner_predicted[name][i]);
        csv += "," + std::to_string(r.predicted[i]) + "\n";
      }
      write_text(*artifacts / "predictions.csv", csv);
      return 0;
    });
  }
  return r;
}

// ---- tables ----

std::map<std::string, double> average_ranks(const ResultTable& table) {
  std::map<std::string, std::map<std::string, double>> grid;  // dataset -> method -> accuracy
  std::set<std::string> methods;
  for (const auto& row : table) {
    if (!(row.accuracy >= 0.0 && row.accuracy <= 1.0)) throw ContractError("accuracy outside [0, 1]");
    if (!grid[row.dataset].emplace(row.method, row.accuracy).second)
      throw ContractError("duplicate result for " + row.dataset + "/" + row.method);
    methods.insert(row.method);
  }
  if (grid.empty()) throw ContractError("no results to rank");
  std::map<std::string, double> sum;
  for (const auto& [dataset, accs] : grid) {
    for (const auto& m : methods)
      if (!accs.count(m)) throw ContractError("method " + m + " has no result on dataset " + dataset);
    for (const auto& [m, a] : accs) {
      std::size_t better = 0, equal = 0;
      for (const auto& [other, b] : accs) {
        better += b > a;
        equal += b == a;
      }
      // Ties occupy ranks better+1 .. better+equal.
      sum[m] += static_cast<double>(better) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
  }
  for (auto& [m, s] : sum) s /= static_cast<double>(grid.size());
  return sum;
}

std::map<std::string, double> improvement_over(const ResultTable& table, const std::string& method,
                                               const std::string& reference) {
  std::map<std::string, std::map<std::string, double>> grid;
  for (const auto& row : table) grid[row.dataset][row.method] = row.accuracy;
  std::map<std::string, double> out;
  for (const auto& [dataset, accs] : grid) {
    const auto a = accs.find(method), b = accs.find(reference);
    if (a == accs.end() || b == accs.end())
      throw ContractError("dataset " + dataset + " lacks " + method + " or " + reference);
    out[dataset] = 100.0 * (a->second - b->second);
  }
  return out;
}

std::string format_results_csv(const ResultTable& table, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\ndataset,method,accuracy\n";
  for (const auto& r : table) out += r.dataset + "," + r.method + "," + detail::format_real(r.accuracy) + "\n";
  return out;
}

ResultTable parse_results_csv(const std::string& text) {
  ResultTable table;
  std::size_t line_no = 0;
  bool header = false;
  for (const auto& raw : detail::split_lines(text)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split(line, ',');
    if (!header) {
      header = true;
      if (fields.size() == 3 && detail::trim(fields[0]) == "dataset") continue;
    }
    if (fields.size() != 3) throw FormatError("expected dataset,method,accuracy", line_no);
    const auto acc = detail::parse_real(detail::trim(fields[2]));
    if (!acc) throw FormatError("bad accuracy '" + std::string(fields[2]) + "'", line_no);
    table.push_back({std::string(detail::trim(fields[0])), std::string(detail::trim(fields[1])), *acc});
  }
  return table;
}

std::string format_ranks_csv(const std::map<std::string, double>& ranks, const std::string& hash) {
  std::vector<std::pair<double, std::string>> order;
  for (const auto& [m, r] : ranks) order.emplace_back(r, m);
  std::sort(order.begin(), order.end());
  std::string out = "# config_hash=" + hash + "\nmethod,average_rank\n";
  for (const auto& [r, m] : order) out += m + "," + detail::format_real(r) + "\n";
  return out;
}

ResultTable run_benchmark(const RunConfig& cfg) {
  const auto datasets = load_datasets(cfg);
  if (datasets.empty()) throw ConfigError("no datasets configured");
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  const std::string hash = config_hash(cfg);

  ResultTable table;
  for (const auto& d : datasets) {
    const auto r = run_totopo(cfg, d.train, d.test, out_dir / d.name);
    table.push_back({d.name, kTotopo, r.accuracy});
    if (cfg.baseline_euclidean) table.push_back({d.name, kEuclidean, nn_euclidean(d.train, d.test).accuracy});
    if (cfg.baseline_dtw) table.push_back({d.name, kDtw, nn_dtw(d.train, d.test, cfg.dtw_window).accuracy});
  }
  write_text(out_dir / "results.csv", format_results_csv(table, hash));
  write_text(out_dir / "ranks.csv", format_ranks_csv(average_ranks(table), hash));
  if (cfg.baseline_dtw) {
    std::string csv = "# config_hash=" + hash + "\ndataset,improvement_over_dtw_pp\n";
    for (const auto& [name, pp] : improvement_over(table, kTotopo, kDtw))
      csv += name + "," + detail::format_real(pp) + "\n";
    write_text(out_dir / "improvement.csv", csv);
  }
  write_text(out_dir / "config.json", run_config_to_json(cfg));
  return table;
}

// ---- noise ----

std::vector<NoiseRow> noise_sweep(const RunConfig& cfg, const NamedDataset& dataset) {
  if (dataset.test.size() == 0) throw ContractError("noise sweep needs a nonempty test split");
  const auto model = TotopoModel::fit(cfg, dataset.train);
  std::vector<NoiseRow> rows;
  for (int level : cfg.noise_levels) {
    const auto snr = snr_for_level(level);
    const LabeledDataset test =
        snr ? add_noise_snr(dataset.test, {*snr, mix_seed(cfg.seed, 0x4E015E00ULL + static_cast<std::uint64_t>(level))})
            : dataset.test;
    const auto pred = model.predict(test);
    rows.push_back({dataset.name, kTotopo, level, accuracy(pred.combined.predicted_classes, test.labels)});
    if (cfg.baseline_euclidean) rows.push_back({dataset.name, kEuclidean, level, nn_euclidean(dataset.train, test).accuracy});
    if (cfg.baseline_dtw) rows.push_back({dataset.name, kDtw, level, nn_dtw(dataset.train, test, cfg.dtw_window).accuracy});
  }
  return rows;
}

std::string format_noise_csv(const std::vector<NoiseRow>& rows, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n# noise applied to the test split only\ndataset,method,level,snr_db,accuracy\n";
  for (const auto& r : rows) {
    const auto snr = snr_for_level(r.level);
    out += r.dataset + "," + r.method + "," + std::to_string(r.level) + "," +
           (snr ? detail::format_real(*snr) : std::string("inf")) + "," + detail::format_real(r.accuracy) + "\n";
  }
  return out;
}

std::vector<NoiseRow> run_noise_sweep(const RunConfig& cfg) {
  const auto datasets = load_datasets(cfg);
  if (datasets.empty()) throw ConfigError("no datasets configured");
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  std::vector<NoiseRow> rows;
  for (const auto& d : datasets) {
    auto part = noise_sweep(cfg, d);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_text(out_dir / "noise_curve.csv", format_noise_csv(rows, config_hash(cfg)));
  write_text(out_dir / "config.json", run_config_to_json(cfg));
  return rows;
}

}  // namespace totopo
