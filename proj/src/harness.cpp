#include "wavedir/harness.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace wavedir {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return hex64(h);
}

std::vector<double> load_boundaries(const std::string& path) {
  std::vector<double> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw DataError("preprocess: cannot open boundary file " + path);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

Json metrics_to_json(const MetricReport& rep) {
  return Json{{"mape_percent", rep.mape_percent},
              {"angular_score_deg", rep.angular_score_deg},
              {"n_samples", rep.n_samples}};
}

void write_diffs_csv(const std::string& path, const MetricReport& rep) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "index,normalized_diff_rad,normalized_diff_deg\n";
  out.precision(17);
  for (std::size_t i = 0; i < rep.diffs.size(); ++i) {
    out << i << ',' << rep.diffs[i] << ',' << rad_to_deg(rep.diffs[i]) << '\n';
  }
}

void write_train_log(const std::string& path, const LossReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const EpochStats& st : report) {
    Json j{{"epoch", st.epoch}, {"train_mse", st.train_mse}, {"seconds", st.seconds}};
    if (st.test_mse >= 0) j["test_mse"] = st.test_mse;
    out << j.dump() << '\n';
  }
}

}  // namespace

DatasetBundle preprocess_dir(const std::string& raw_dir,
                             const std::string& out_dir,
                             const PreprocessOptions& opt) {
  const auto meta = load_metadata(raw_dir + "/metadata.csv");
  if (meta.empty()) throw DataError("preprocess: metadata lists no transects");
  const auto boundaries = load_boundaries(opt.boundary_file);

  std::vector<Transect> transects;
  for (const TransectMeta& m : meta) {
    const auto loaded = load_csv(raw_dir + "/" + m.id + ".csv");
    const auto segments =
        clean_and_segment(loaded.records, opt.speed_floor, opt.min_len, boundaries);
    const double dir = wrap_pi(deg_to_rad(m.wave_direction_deg));
    for (std::size_t k = 0; k < segments.size(); ++k) {
      transects.push_back(build_transect(
          segments[k], m.id + "_" + std::to_string(k), dir, m.sample_rate_hz));
    }
  }
  if (transects.empty()) {
    throw DataError("preprocess: no transects survived cleaning");
  }

  WindowSet all = make_windows(transects, opt.sequence_size, opt.stride);
  SeededRng split_rng = SeededRng(opt.seed).fork("split");
  auto [train, test] = split(all, opt.train_fraction, split_rng, opt.split_mode);

  Standardizer std_ = fit_standardizer(train);
  apply_standardizer(std_, train);
  apply_standardizer(std_, test);
  if (std_.fit_count != 1) {
    throw StateError("preprocess: standardizer fitted more than once");
  }

  DatasetBundle ds;
  ds.train = std::move(train);
  ds.test = std::move(test);
  ds.standardizer = std_;
  ds.sample_rate = meta.front().sample_rate_hz;
  ds.split_seed = opt.seed;
  ds.stride = opt.stride;
  ds.split_mode =
      opt.split_mode == SplitMode::kChronological ? "chronological" : "shuffled";
  save_dataset(out_dir, ds);
  return ds;
}

TrainRunResult train_run(const std::string& data_dir, const std::string& out_dir,
                         const TrainRunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  DatasetBundle ds = load_dataset(data_dir);
  if (ds.train.n != opt.model.sequence_size) {
    throw ArgumentError("train: dataset sequence size " +
                        std::to_string(ds.train.n) + " does not match config " +
                        std::to_string(opt.model.sequence_size) +
                        " (re-run preprocess)");
  }

  TrainRunResult res;
  res.checkpoint_path = out_dir + "/model.ckpt";
  res.log_path = out_dir + "/train_log.jsonl";

  Json ckpt_meta;
  ckpt_meta["seed"] = opt.train.seed;
  ckpt_meta["dataset"] = data_dir;
  ckpt_meta["standardizer_mu"] = std::vector<double>(
      ds.standardizer.mu.data(), ds.standardizer.mu.data() + kFeatureCount);
  ckpt_meta["standardizer_sigma"] =
      std::vector<double>(ds.standardizer.sigma_clamped.data(),
                          ds.standardizer.sigma_clamped.data() + kFeatureCount);

  Mat pred;
  if (opt.model_kind == "lstm") {
    SeededRng init_rng = SeededRng(opt.train.seed).fork("init-lstm");
    StackedLstm model = make_lstm(opt.model, init_rng);
    res.report = train(model, ds.train,
                       opt.eval_each_epoch ? &ds.test : nullptr, opt.train);
    pred = predict_batch(model, ds.test);
    save_lstm_checkpoint(res.checkpoint_path, model, ckpt_meta);
  } else if (opt.model_kind == "mlp") {
    const int input_dim = (opt.model.sequence_size - 1) * kFeatureCount;
    SeededRng init_rng = SeededRng(opt.train.seed).fork("init-mlp");
    Mlp model = make_mlp(input_dim, opt.model.hidden, init_rng);
    res.report = train_mlp(model, ds.train,
                           opt.eval_each_epoch ? &ds.test : nullptr, opt.train);
    pred = mlp_predict_batch(model, ds.test);
    save_mlp_checkpoint(res.checkpoint_path, model, ckpt_meta);
  } else {
    throw ArgumentError("train: unknown model kind '" + opt.model_kind +
                        "' (supported: lstm, mlp)");
  }

  res.test_metrics = evaluate_predictions(pred, ds.test.targets);
  write_train_log(res.log_path, res.report);
  write_json(out_dir + "/metrics.json", metrics_to_json(res.test_metrics));

  std::ostringstream cfg_str;
  cfg_str << opt.model_kind << ':' << opt.model.sequence_size << ':'
          << opt.model.hidden << ':' << opt.model.num_layers << ':'
          << opt.train.learning_rate << ':' << opt.train.epochs << ':'
          << opt.train.batch_size << ':' << opt.train.seed;
  Json run;
  run["format_version"] = 1;
  run["seed"] = opt.train.seed;
  run["model_kind"] = opt.model_kind;
  run["config"] = {{"sequence_size", opt.model.sequence_size},
                   {"hidden", opt.model.hidden},
                   {"num_layers", opt.model.num_layers},
                   {"learning_rate", opt.train.learning_rate},
                   {"epochs", opt.train.epochs},
                   {"batch_size", opt.train.batch_size}};
  run["config_hash"] =
      hex64(fnv1a(cfg_str.str().data(), cfg_str.str().size()));
  run["artifacts"] = {{"checkpoint", file_digest(res.checkpoint_path)},
                      {"metrics", file_digest(out_dir + "/metrics.json")}};
  run["wall_seconds"] = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
  write_json(out_dir + "/run.json", run);
  return res;
}

namespace {

Mat checkpoint_predict(const std::string& checkpoint_path, const WindowSet& ws) {
  const std::string kind = checkpoint_kind(checkpoint_path);
  if (kind == "lstm") {
    StackedLstm model = load_lstm_checkpoint(checkpoint_path);
    return predict_batch(model, ws);
  }
  if (kind == "mlp") {
    Mlp model = load_mlp_checkpoint(checkpoint_path);
    return mlp_predict_batch(model, ws);
  }
  throw SchemaError("unsupported checkpoint kind: " + kind);
}

const WindowSet& pick_split(const DatasetBundle& ds, const std::string& which) {
  if (which == "test") return ds.test;
  if (which == "train") return ds.train;
  throw ArgumentError("unknown split '" + which + "' (use train or test)");
}

}  // namespace

MetricReport eval_run(const std::string& checkpoint_path,
                      const std::string& data_dir, const std::string& out_dir,
                      const std::string& which) {
  fs::create_directories(out_dir);
  DatasetBundle ds = load_dataset(data_dir);
  const WindowSet& ws = pick_split(ds, which);
  const Mat pred = checkpoint_predict(checkpoint_path, ws);
  const MetricReport rep = evaluate_predictions(pred, ws.targets);
  write_json(out_dir + "/metrics.json", metrics_to_json(rep));
  write_diffs_csv(out_dir + "/diffs.csv", rep);
  return rep;
}

PredictSummary predict_run(const std::string& checkpoint_path,
                           const std::string& data_dir,
                           const std::string& out_dir,
                           const std::string& which) {
  fs::create_directories(out_dir);
  DatasetBundle ds = load_dataset(data_dir);
  const WindowSet& ws = pick_split(ds, which);
  const Mat pred = checkpoint_predict(checkpoint_path, ws);

  PredictSummary sum;
  sum.csv_path = out_dir + "/predictions.csv";
  std::ofstream out(sum.csv_path);
  if (!out) throw DataError("predict: cannot write " + sum.csv_path);
  out << "index,pred_sin,pred_cos,relative_deg,yaw_deg,wave_direction_deg\n";
  out.precision(17);
  std::vector<double> wave_dirs;
  for (Index i = 0; i < ws.count(); ++i) {
    const double rel = to_angle(pred(i, 0), pred(i, 1));
    const double wave =
        recover_wave_direction(pred(i, 0), pred(i, 1), ws.final_yaw[i]);
    wave_dirs.push_back(wave);
    out << i << ',' << pred(i, 0) << ',' << pred(i, 1) << ','
        << rad_to_deg(rel) << ',' << rad_to_deg(ws.final_yaw[i]) << ','
        << rad_to_deg(wave) << '\n';
  }
  sum.n_samples = ws.count();
  sum.mean_wave_direction_deg = wrap_two_pi(circular_mean(wave_dirs)) * 180.0 / kPi;
  write_json(out_dir + "/predict.json",
             Json{{"mean_wave_direction_deg", sum.mean_wave_direction_deg},
                  {"n_samples", sum.n_samples},
                  {"sample_rate_hz", ds.sample_rate}});
  return sum;
}

SmoothSummary smooth_run(const std::string& predictions_csv,
                         const std::string& out_dir, double window_seconds,
                         double sample_rate) {
  if (window_seconds * sample_rate < 1.0) {
    throw ArgumentError("smooth: window_seconds * sample_rate must be >= 1");
  }
  std::ifstream in(predictions_csv);
  if (!in) throw DataError("smooth: cannot open " + predictions_csv);
  std::string header;
  if (!std::getline(in, header)) throw SchemaError("smooth: empty predictions file");
  // locate the direction column
  int col = -1, c = 0;
  std::stringstream hs(header);
  std::string cell;
  while (std::getline(hs, cell, ',')) {
    if (cell == "wave_direction_deg") col = c;
    ++c;
  }
  if (col < 0) throw SchemaError("smooth: no wave_direction_deg column");

  std::vector<double> angles;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    int k = 0;
    double v = 0;
    while (std::getline(ls, cell, ',')) {
      if (k == col) v = std::strtod(cell.c_str(), nullptr);
      ++k;
    }
    angles.push_back(deg_to_rad(v));
  }

  const auto smoothed =
      moving_average_direction(angles, window_seconds, sample_rate);

  fs::create_directories(out_dir);
  std::ofstream out(out_dir + "/smoothed.csv");
  out << "index,wave_direction_deg,smoothed_wave_direction_deg\n";
  out.precision(17);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    out << i << ',' << rad_to_deg(wrap_two_pi(angles[i])) << ','
        << rad_to_deg(wrap_two_pi(smoothed[i])) << '\n';
  }

  SmoothSummary sum;
  sum.window_seconds = window_seconds;
  sum.kernel_samples =
      static_cast<int>(std::max(1.0, std::round(window_seconds * sample_rate)));
  sum.std_before_deg = rad_to_deg(circular_std(angles));
  sum.std_after_deg = rad_to_deg(circular_std(smoothed));
  sum.mean_before_deg = rad_to_deg(wrap_two_pi(circular_mean(angles)));
  sum.mean_after_deg = rad_to_deg(wrap_two_pi(circular_mean(smoothed)));
  write_json(out_dir + "/smooth.json",
             Json{{"window_seconds", sum.window_seconds},
                  {"kernel_samples", sum.kernel_samples},
                  {"circular_std_before_deg", sum.std_before_deg},
                  {"circular_std_after_deg", sum.std_after_deg},
                  {"circular_mean_before_deg", sum.mean_before_deg},
                  {"circular_mean_after_deg", sum.mean_after_deg}});
  return sum;
}

SweepResult run_sweep(const std::string& raw_dir, const std::string& out_dir,
                      const SweepOptions& opt) {
  fs::create_directories(out_dir);

  // one preprocessed dataset per sequence size, shared across configs
  for (int n : opt.sequence_sizes) {
    PreprocessOptions popt;
    popt.sequence_size = n;
    popt.stride = opt.stride;
    popt.seed = opt.seed;
    preprocess_dir(raw_dir, out_dir + "/data_n" + std::to_string(n), popt);
  }

  SweepResult result;
  for (int layers : opt.layer_counts) {
    for (int hidden : opt.hidden_sizes) {
      for (int n : opt.sequence_sizes) {
        for (double lr : opt.learning_rates) {
          SweepCell cell;
          cell.sequence_size = n;
          cell.hidden = hidden;
          cell.layers = layers;
          cell.learning_rate = lr;
          result.cells.push_back(cell);
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.cells.size()) return;
      SweepCell& cell = result.cells[i];
      char label[64];
      std::snprintf(label, sizeof label, "n%d_h%d_L%d_lr%g", cell.sequence_size,
                    cell.hidden, cell.layers, cell.learning_rate);
      cell.run_dir = out_dir + "/runs/" + label;
      try {
        TrainRunOptions topt;
        topt.model_kind = "lstm";
        topt.model.sequence_size = cell.sequence_size;
        topt.model.hidden = cell.hidden;
        topt.model.num_layers = cell.layers;
        topt.model.learning_rate = cell.learning_rate;
        topt.train.epochs = opt.epochs;
        topt.train.batch_size = opt.batch_size;
        topt.train.learning_rate = cell.learning_rate;
        topt.train.seed = SeededRng(opt.seed).fork(label).state();
        const TrainRunResult rr = train_run(
            out_dir + "/data_n" + std::to_string(cell.sequence_size),
            cell.run_dir, topt);
        cell.mape_percent = rr.test_metrics.mape_percent;
        cell.angular_score_deg = rr.test_metrics.angular_score_deg;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::max(1, opt.parallelism);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const SweepCell& c = result.cells[i];
    if (!c.ok) continue;
    if (result.best_angular_index < 0 ||
        c.angular_score_deg <
            result.cells[result.best_angular_index].angular_score_deg) {
      result.best_angular_index = static_cast<int>(i);
    }
    if (result.best_mape_index < 0 ||
        c.mape_percent < result.cells[result.best_mape_index].mape_percent) {
      result.best_mape_index = static_cast<int>(i);
    }
  }

  result.table_csv_path = out_dir + "/sweep.csv";
  std::ofstream csv(result.table_csv_path);
  csv << "sequence_size,hidden,layers,learning_rate,mape_percent,angular_score_deg\n";
  csv.precision(17);
  for (const SweepCell& c : result.cells) {
    csv << c.sequence_size << ',' << c.hidden << ',' << c.layers << ','
        << c.learning_rate << ',';
    if (c.ok) {
      csv << c.mape_percent << ',' << c.angular_score_deg << '\n';
    } else {
      csv << "nan,nan\n";
    }
  }
  csv.close();

  Json j;
  j["format_version"] = 1;
  j["seed"] = opt.seed;
  j["cells"] = Json::array();
  for (const SweepCell& c : result.cells) {
    Json cj{{"sequence_size", c.sequence_size}, {"hidden", c.hidden},
            {"layers", c.layers},               {"learning_rate", c.learning_rate},
            {"ok", c.ok},                       {"run_dir", c.run_dir}};
    if (c.ok) {
      cj["mape_percent"] = c.mape_percent;
      cj["angular_score_deg"] = c.angular_score_deg;
    } else {
      cj["error"] = c.error;
    }
    j["cells"].push_back(cj);
  }
  j["best_angular_index"] = result.best_angular_index;
  j["best_mape_index"] = result.best_mape_index;
  if (result.best_angular_index >= 0) {
    const SweepCell& c = result.cells[result.best_angular_index];
    // selection follows angular score, the metric that drives model choice
    j["selected"] = {{"sequence_size", c.sequence_size},
                     {"hidden", c.hidden},
                     {"layers", c.layers},
                     {"learning_rate", c.learning_rate}};
  }
  write_json(out_dir + "/sweep.json", j);
  return result;
}

Vec2 circular_mean_predictor(const WindowSet& train) {
  std::vector<double> angles;
  angles.reserve(train.count());
  for (Index i = 0; i < train.count(); ++i) {
    angles.push_back(to_angle(train.targets(i, 0), train.targets(i, 1)));
  }
  const double mean = circular_mean(angles);
  return Vec2(std::sin(mean), std::cos(mean));
}

std::vector<BaselineRow> run_baseline(const std::string& data_dir,
                                      const std::string& out_dir,
                                      const std::vector<std::string>& models,
                                      const ModelConfig& shared,
                                      const TrainConfig& train_cfg) {
  fs::create_directories(out_dir);
  DatasetBundle ds = load_dataset(data_dir);

  std::vector<BaselineRow> rows;
  for (const std::string& name : models) {
    Mat pred;
    if (name == "lstm") {
      SeededRng rng = SeededRng(train_cfg.seed).fork("baseline-lstm");
      StackedLstm model = make_lstm(shared, rng);
      train(model, ds.train, nullptr, train_cfg);
      pred = predict_batch(model, ds.test);
    } else if (name == "mlp") {
      SeededRng rng = SeededRng(train_cfg.seed).fork("baseline-mlp");
      Mlp model =
          make_mlp((shared.sequence_size - 1) * kFeatureCount, shared.hidden, rng);
      train_mlp(model, ds.train, nullptr, train_cfg);
      pred = mlp_predict_batch(model, ds.test);
    } else if (name == "circular_mean") {
      const Vec2 p = circular_mean_predictor(ds.train);
      pred.resize(ds.test.count(), 2);
      pred.col(0).setConstant(p(0));
      pred.col(1).setConstant(p(1));
    } else {
      throw ArgumentError("baseline: unknown model '" + name +
                          "' (supported: lstm, mlp, circular_mean)");
    }
    const MetricReport rep = evaluate_predictions(pred, ds.test.targets);
    rows.push_back({name, rep.mape_percent, rep.angular_score_deg});
  }

  std::ofstream csv(out_dir + "/baseline.csv");
  csv << "model,mape_percent,angular_score_deg\n";
  csv.precision(17);
  Json j = Json::array();
  for (const BaselineRow& r : rows) {
    csv << r.model << ',' << r.mape_percent << ',' << r.angular_score_deg << '\n';
    j.push_back({{"model", r.model},
                 {"mape_percent", r.mape_percent},
                 {"angular_score_deg", r.angular_score_deg}});
  }
  write_json(out_dir + "/baseline.json", j);
  return rows;
}

}  // namespace wavedir
