// wavedir: wave-direction estimation from USV sensor logs.
// Subcommands cover the full lifecycle: synth -> preprocess -> train ->
// eval / predict / smooth, plus the hyperparameter sweep and baseline
// comparison.

#include "wavedir/harness.hpp"
#include "wavedir/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

using namespace wavedir;

// Flat key=value config file; CLI flags win over file values.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  if (path.empty()) return kv;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SchemaError("config line missing '=': " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

template <typename T>
void maybe_set(const std::map<std::string, std::string>& kv,
               const std::string& key, T* out) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  std::stringstream ss(it->second);
  ss >> *out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavedir: LSTM wave-direction estimation pipeline"};
  app.require_subcommand(1);

  std::string config_file, out_dir = "out", data_dir, raw_dir, checkpoint,
              predictions;
  std::uint64_t seed = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  std::string scenario = "pool";
  double scale = 1.0;
  synth->add_option("--scenario", scenario, "pool or sea")
      ->check(CLI::IsMember({"pool", "sea"}));
  synth->add_option("--scale", scale, "duration scale factor");
  synth->add_option("--seed", seed);
  synth->add_option("--out", out_dir)->required();

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "raw CSV dir -> windowed dataset");
  PreprocessOptions popt;
  std::string split_mode = "chronological";
  prep->add_option("--data", raw_dir, "directory with <id>.csv + metadata.csv")
      ->required();
  prep->add_option("--out", out_dir)->required();
  prep->add_option("--sequence-size", popt.sequence_size);
  prep->add_option("--stride", popt.stride);
  prep->add_option("--train-fraction", popt.train_fraction);
  prep->add_option("--split", split_mode)
      ->check(CLI::IsMember({"chronological", "shuffled"}));
  prep->add_option("--seed", seed);
  prep->add_option("--speed-floor", popt.speed_floor);
  prep->add_option("--min-len", popt.min_len);
  prep->add_option("--boundaries", popt.boundary_file,
                   "file with one split timestamp per line");
  prep->add_option("--config", config_file);

  // train
  auto* tr = app.add_subcommand("train", "train a model on a preprocessed dataset");
  TrainRunOptions topt;
  tr->add_option("--data", data_dir, "preprocessed dataset dir")->required();
  tr->add_option("--out", out_dir)->required();
  tr->add_option("--model", topt.model_kind)->check(CLI::IsMember({"lstm", "mlp"}));
  tr->add_option("--sequence-size", topt.model.sequence_size);
  tr->add_option("--hidden", topt.model.hidden);
  tr->add_option("--layers", topt.model.num_layers);
  tr->add_option("--lr", topt.train.learning_rate);
  tr->add_option("--epochs", topt.train.epochs);
  tr->add_option("--batch", topt.train.batch_size);
  tr->add_option("--seed", seed);
  tr->add_flag("--eval-each-epoch", topt.eval_each_epoch);
  tr->add_option("--config", config_file);

  // eval
  auto* ev = app.add_subcommand("eval", "metrics for a checkpoint on a dataset");
  std::string which = "test";
  ev->add_option("--checkpoint", checkpoint)->required();
  ev->add_option("--data", data_dir)->required();
  ev->add_option("--out", out_dir)->required();
  ev->add_option("--split", which)->check(CLI::IsMember({"train", "test"}));

  // predict
  auto* pr = app.add_subcommand("predict", "recover absolute wave directions");
  pr->add_option("--checkpoint", checkpoint)->required();
  pr->add_option("--data", data_dir)->required();
  pr->add_option("--out", out_dir)->required();
  pr->add_option("--split", which)->check(CLI::IsMember({"train", "test"}));

  // smooth
  auto* sm = app.add_subcommand("smooth", "circular moving average over predictions");
  double window_seconds = 16.0, sample_rate = 36.0;
  sm->add_option("--predictions", predictions, "predictions.csv from predict")
      ->required();
  sm->add_option("--out", out_dir)->required();
  sm->add_option("--window-seconds", window_seconds);
  sm->add_option("--sample-rate", sample_rate);

  // sweep
  auto* sw = app.add_subcommand("sweep", "full hyperparameter grid");
  SweepOptions sopt;
  sw->add_option("--data", raw_dir, "raw scenario dir")->required();
  sw->add_option("--out", out_dir)->required();
  sw->add_option("--seed", seed);
  sw->add_option("--parallelism", sopt.parallelism);
  sw->add_option("--epochs", sopt.epochs);
  sw->add_option("--stride", sopt.stride);

  // baseline
  auto* bl = app.add_subcommand("baseline", "model comparison on one split");
  std::vector<std::string> models = {"lstm", "mlp", "circular_mean"};
  ModelConfig shared;
  TrainConfig bl_train;
  bl->add_option("--data", data_dir, "preprocessed dataset dir")->required();
  bl->add_option("--out", out_dir)->required();
  bl->add_option("--models", models)->delimiter(',');
  bl->add_option("--sequence-size", shared.sequence_size);
  bl->add_option("--hidden", shared.hidden);
  bl->add_option("--layers", shared.num_layers);
  bl->add_option("--lr", bl_train.learning_rate);
  bl->add_option("--epochs", bl_train.epochs);
  bl->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto kv = load_config(config_file);

    if (synth->parsed()) {
      const Scenario s = scenario == "pool" ? make_pool_scenario(seed, scale)
                                            : make_sea_scenario(seed, scale);
      write_scenario(s, out_dir);
      std::size_t records = 0;
      for (const auto& t : s.transects) records += t.records.size();
      std::cout << "wrote " << s.transects.size() << " transects ("
                << records << " records) to " << out_dir << "\n";
    } else if (prep->parsed()) {
      maybe_set(kv, "sequence_size", &popt.sequence_size);
      maybe_set(kv, "stride", &popt.stride);
      maybe_set(kv, "train_fraction", &popt.train_fraction);
      maybe_set(kv, "speed_floor", &popt.speed_floor);
      popt.seed = seed;
      popt.split_mode = split_mode == "shuffled" ? SplitMode::kShuffled
                                                 : SplitMode::kChronological;
      const DatasetBundle ds = preprocess_dir(raw_dir, out_dir, popt);
      std::cout << "train windows: " << ds.train.count()
                << ", test windows: " << ds.test.count() << "\n";
    } else if (tr->parsed()) {
      maybe_set(kv, "hidden", &topt.model.hidden);
      maybe_set(kv, "layers", &topt.model.num_layers);
      maybe_set(kv, "epochs", &topt.train.epochs);
      maybe_set(kv, "batch_size", &topt.train.batch_size);
      maybe_set(kv, "learning_rate", &topt.train.learning_rate);
      topt.train.seed = seed;
      topt.model.learning_rate = topt.train.learning_rate;
      const TrainRunResult rr = train_run(data_dir, out_dir, topt);
      std::cout << "final train MSE: " << rr.report.back().train_mse
                << ", test angular score: "
                << rr.test_metrics.angular_score_deg << " deg\n";
    } else if (ev->parsed()) {
      const MetricReport rep = eval_run(checkpoint, data_dir, out_dir, which);
      std::cout << "MAPE: " << rep.mape_percent
                << " %, angular score: " << rep.angular_score_deg << " deg ("
                << rep.n_samples << " samples)\n";
    } else if (pr->parsed()) {
      const PredictSummary sum = predict_run(checkpoint, data_dir, out_dir, which);
      std::cout << "mean predicted wave direction: "
                << sum.mean_wave_direction_deg << " deg over " << sum.n_samples
                << " samples\n";
    } else if (sm->parsed()) {
      const SmoothSummary sum =
          smooth_run(predictions, out_dir, window_seconds, sample_rate);
      std::cout << "circular std: " << sum.std_before_deg << " -> "
                << sum.std_after_deg << " deg (kernel " << sum.kernel_samples
                << " samples)\n";
    } else if (sw->parsed()) {
      sopt.seed = seed;
      const SweepResult res = run_sweep(raw_dir, out_dir, sopt);
      std::cout << "sweep table: " << res.table_csv_path << "\n";
      if (res.best_angular_index >= 0) {
        const SweepCell& c = res.cells[res.best_angular_index];
        std::cout << "selected (best angular score " << c.angular_score_deg
                  << " deg): n=" << c.sequence_size << " hidden=" << c.hidden
                  << " layers=" << c.layers << " lr=" << c.learning_rate << "\n";
      }
    } else if (bl->parsed()) {
      bl_train.seed = seed;
      shared.learning_rate = bl_train.learning_rate;
      const auto rows = run_baseline(data_dir, out_dir, models, shared, bl_train);
      for (const BaselineRow& r : rows) {
        std::cout << r.model << ": MAPE " << r.mape_percent
                  << " %, angular score " << r.angular_score_deg << " deg\n";
      }
    }
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
