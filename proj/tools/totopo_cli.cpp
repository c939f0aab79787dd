#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "totopo/bench.hpp"
#include "totopo/error.hpp"

using namespace totopo;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Flags that mirror RunConfig. Unset flags leave the --config value alone.
struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> datasets;
  std::vector<std::string> synthetic;
  std::optional<int> synth_n;
  std::optional<int> synth_length;
  std::optional<std::string> out;
  std::optional<std::size_t> d, W, k, epochs, batch, dtw_window;
  std::optional<double> ratio, learning_rate;
  std::vector<std::size_t> channels;
  std::vector<int> levels;
  bool no_normalize = false, no_dtw = false, no_euclidean = false, sequential = false, validation = false;

  void attach(CLI::App* app, bool sweep) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "global seed (overrides the config)");
    app->add_option("--dataset", datasets, "train file (*_TRAIN.ts/.csv) or directory");
    app->add_option("--synthetic", synthetic, "synthetic classes, e.g. sine:5 sine:11 noise");
    app->add_option("--synth-n", synth_n, "synthetic instances per split");
    app->add_option("--synth-length", synth_length, "synthetic series length");
    app->add_option("--out", out, "output directory");
    app->add_option("--d", d, "embedding window");
    app->add_option("--W", W, "embedding vectors per L2-norm point cloud");
    app->add_option("--k", k, "Betti series length");
    app->add_option("--ratio", ratio, "relevant-hole ratio");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--batch-size", batch, "mini-batch size");
    app->add_option("--learning-rate", learning_rate, "Adam learning rate");
    app->add_option("--channels", channels, "conv widths of the three blocks")->expected(3);
    app->add_option("--dtw-window", dtw_window, "Sakoe-Chiba radius");
    app->add_flag("--no-normalize", no_normalize, "skip per-instance z-normalisation");
    app->add_flag("--no-dtw", no_dtw, "skip the 1-NN DTW baseline");
    app->add_flag("--no-euclidean", no_euclidean, "skip the 1-NN Euclidean baseline");
    app->add_flag("--sequential", sequential, "train the four learners one after another");
    app->add_flag("--validation-ranking", validation, "rank learners by held-out loss instead of training loss");
    if (sweep) app->add_option("--levels", levels, "noise levels (0..3)");
  }

  RunConfig build() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : run_config_from_json(read_file(config_path));
    if (seed) cfg.seed = *seed;
    for (const auto& p : datasets) cfg.datasets.push_back(p);
    if (!synthetic.empty()) {
      SyntheticSpec s;
      s.generators = synthetic;
      if (synth_n) s.n_train = s.n_test = *synth_n;
      if (synth_length) s.length = *synth_length;
      if (seed) s.seed = *seed;
      cfg.synthetic.push_back(s);
    }
    if (out) cfg.output_dir = *out;
    if (d) cfg.descriptors.embedding.window = *d;
    if (W) cfg.descriptors.l2.W = *W;
    if (k) cfg.descriptors.betti_k = *k;
    if (ratio) cfg.descriptors.summary.ratio = *ratio;
    if (epochs) cfg.learner.optimizer.epochs = *epochs;
    if (batch) cfg.learner.optimizer.batch_size = *batch;
    if (learning_rate) cfg.learner.optimizer.learning_rate = *learning_rate;
    if (!channels.empty())
      for (std::size_t b = 0; b < 3; ++b) cfg.learner.blocks[b].channels = channels[b];
    if (dtw_window) cfg.dtw_window = *dtw_window;
    if (no_normalize) cfg.normalize = false;
    if (no_dtw) cfg.baseline_dtw = false;
    if (no_euclidean) cfg.baseline_euclidean = false;
    if (sequential) cfg.parallel_learners = false;
    if (validation) cfg.ranking = Ranking::validation_loss;
    if (!levels.empty()) cfg.noise_levels = levels;
    // Round trip so that flag values get the same validation as a config file.
    return run_config_from_json(run_config_to_json(cfg));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological time-series classification and benchmark harness"};
  app.require_subcommand(1);

  RunFlags run_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "run TOTOPO and baselines, write results.csv and ranks.csv");
  run_flags.attach(run, false);
  auto* sweep = app.add_subcommand("sweep-noise", "evaluate at SNR levels 0..3, write noise_curve.csv");
  sweep_flags.attach(sweep, true);

  std::string results_path, ranks_out;
  auto* ranks = app.add_subcommand("ranks", "average ranks from a results.csv");
  ranks->add_option("results", results_path, "results.csv")->required()->check(CLI::ExistingFile);
  ranks->add_option("--out", ranks_out, "write ranks here instead of stdout");

  std::vector<std::string> generators{"sine:5", "sine:11", "noise"};
  int synth_n = 100, synth_length = 128;
  std::uint64_t synth_seed = 7;
  std::string synth_name = "synthetic", synth_out = ".";
  auto* synth = app.add_subcommand("synth", "write NAME_TRAIN.csv and NAME_TEST.csv");
  synth->add_option("--classes", generators, "one generator per class");
  synth->add_option("--n", synth_n, "instances per split");
  synth->add_option("--length", synth_length, "series length");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--name", synth_name, "dataset name");
  synth->add_option("--out", synth_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = run_flags.build();
      const auto table = run_benchmark(cfg);
      for (const auto& r : table) std::printf("%s,%s,%.4f\n", r.dataset.c_str(), r.method.c_str(), r.accuracy);
      std::printf("config_hash=%s output=%s\n", config_hash(cfg).c_str(), cfg.output_dir.c_str());
    } else if (*sweep) {
      const auto cfg = sweep_flags.build();
      for (const auto& r : run_noise_sweep(cfg))
        std::printf("%s,%s,%d,%.4f\n", r.dataset.c_str(), r.method.c_str(), r.level, r.accuracy);
      std::printf("config_hash=%s output=%s\n", config_hash(cfg).c_str(), cfg.output_dir.c_str());
    } else if (*ranks) {
      const auto table = parse_results_csv(read_file(results_path));
      const auto text = format_ranks_csv(average_ranks(table), "external");
      if (ranks_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(ranks_out) << text;
      }
    } else if (*synth) {
      SyntheticSpec s;
      s.name = synth_name;
      s.generators = generators;
      s.n_train = s.n_test = synth_n;
      s.length = synth_length;
      s.seed = synth_seed;
      const auto d = make_synthetic(s);
      std::filesystem::create_directories(synth_out);
      save_csv(d.train, std::filesystem::path(synth_out) / (synth_name + "_TRAIN.csv"));
      save_csv(d.test, std::filesystem::path(synth_out) / (synth_name + "_TEST.csv"));
    }
  } catch (const PipelineError& e) {
    std::fprintf(stderr, "error in stage %s: %s\n", e.stage().c_str(), e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
