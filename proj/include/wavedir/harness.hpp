#pragma once

#include "wavedir/metrics.hpp"
#include "wavedir/serialization.hpp"
#include "wavedir/training.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wavedir {

struct PreprocessOptions {
  int sequence_size = 10;
  int stride = 1;
  double train_fraction = 0.8;
  SplitMode split_mode = SplitMode::kChronological;
  std::uint64_t seed = 0;
  double speed_floor = 0.1;   // m/s
  std::size_t min_len = 100;  // rows
  std::string boundary_file;  // optional per-line split timestamps
};

/// Raw CSV + metadata directory -> standardized, split, serialized dataset.
DatasetBundle preprocess_dir(const std::string& raw_dir,
                             const std::string& out_dir,
                             const PreprocessOptions& opt);

struct TrainRunOptions {
  std::string model_kind = "lstm";  // lstm | mlp
  ModelConfig model;
  TrainConfig train;
  bool eval_each_epoch = false;
};

struct TrainRunResult {
  std::string checkpoint_path;
  std::string log_path;
  LossReport report;
  MetricReport test_metrics;
};

/// Trains on a preprocessed dataset dir, writes model.ckpt, train_log.jsonl,
/// run.json and metrics.json into out_dir.
TrainRunResult train_run(const std::string& data_dir, const std::string& out_dir,
                         const TrainRunOptions& opt);

/// Evaluates a checkpoint against a dataset split ("test" or "train");
/// writes metrics.json and diffs.csv into out_dir.
MetricReport eval_run(const std::string& checkpoint_path,
                      const std::string& data_dir, const std::string& out_dir,
                      const std::string& which = "test");

struct PredictSummary {
  std::string csv_path;
  double mean_wave_direction_deg = 0.0;
  std::int64_t n_samples = 0;
};

/// Recovers absolute wave direction per window; writes predictions.csv and
/// predict.json into out_dir.
PredictSummary predict_run(const std::string& checkpoint_path,
                           const std::string& data_dir,
                           const std::string& out_dir,
                           const std::string& which = "test");

struct SmoothSummary {
  double window_seconds = 0.0;
  int kernel_samples = 0;
  double std_before_deg = 0.0;
  double std_after_deg = 0.0;
  double mean_before_deg = 0.0;
  double mean_after_deg = 0.0;
};

/// Circular moving average over a predictions.csv direction column; writes
/// smoothed.csv and smooth.json into out_dir.
SmoothSummary smooth_run(const std::string& predictions_csv,
                         const std::string& out_dir, double window_seconds,
                         double sample_rate);

struct SweepCell {
  int sequence_size = 0;
  int hidden = 0;
  int layers = 0;
  double learning_rate = 0.0;
  bool ok = false;
  std::string error;
  double mape_percent = 0.0;
  double angular_score_deg = 0.0;
  std::string run_dir;
};

struct SweepOptions {
  std::uint64_t seed = 0;
  int parallelism = 1;
  int epochs = 50;
  int batch_size = 32;
  int stride = 1;
  std::vector<int> sequence_sizes = {10, 20, 30};
  std::vector<int> hidden_sizes = {10, 20, 100};
  std::vector<int> layer_counts = {1, 5};
  std::vector<double> learning_rates = {1e-3, 1e-4};
};

struct SweepResult {
  std::vector<SweepCell> cells;
  int best_angular_index = -1;
  int best_mape_index = -1;
  std::string table_csv_path;
};

/// Trains the full hyperparameter grid; emits sweep.csv (sequence_size,
/// hidden, layers, learning_rate, mape_percent, angular_score_deg) and
/// sweep.json with the selected configuration (best angular score).
SweepResult run_sweep(const std::string& raw_dir, const std::string& out_dir,
                      const SweepOptions& opt);

struct BaselineRow {
  std::string model;
  double mape_percent = 0.0;
  double angular_score_deg = 0.0;
};

/// Trains/evaluates the requested predictors on one shared split and seed;
/// writes baseline.csv + baseline.json. Supported: lstm, mlp, circular_mean.
std::vector<BaselineRow> run_baseline(const std::string& data_dir,
                                      const std::string& out_dir,
                                      const std::vector<std::string>& models,
                                      const ModelConfig& shared,
                                      const TrainConfig& train_cfg);

/// Always predicts the training set's circular mean target direction.
Vec2 circular_mean_predictor(const WindowSet& train);

}  // namespace wavedir
