#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wavedir/harness.hpp"
#include "wavedir/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

using namespace wavedir;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path root;
  std::string raw;

  Fixture() {
    root = fs::temp_directory_path() / "wavedir_harness_test";
    fs::remove_all(root);
    fs::create_directories(root);
    raw = (root / "raw").string();
    write_scenario(make_pool_scenario(123, 0.1), raw);
  }

  std::string dir(const std::string& name) const { return (root / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

PreprocessOptions small_preprocess() {
  PreprocessOptions opt;
  opt.sequence_size = 10;
  opt.stride = 5;
  opt.seed = 9;
  return opt;
}

}  // namespace

TEST_CASE("preprocess_dir: artifacts, split shape, reload, determinism") {
  Fixture fx;
  const PreprocessOptions opt = small_preprocess();
  const DatasetBundle ds = preprocess_dir(fx.raw, fx.dir("data"), opt);

  CHECK(fs::exists(fx.dir("data") + "/train.bin"));
  CHECK(fs::exists(fx.dir("data") + "/test.bin"));
  CHECK(fs::exists(fx.dir("data") + "/dataset.json"));

  CHECK(ds.train.count() > 0);
  CHECK(ds.test.count() > 0);
  const double frac = static_cast<double>(ds.train.count()) /
                      static_cast<double>(ds.train.count() + ds.test.count());
  CHECK(frac > 0.75);
  CHECK(frac < 0.85);
  CHECK(ds.standardizer.fit_count == 1);
  CHECK(ds.split_mode == "chronological");

  const DatasetBundle back = load_dataset(fx.dir("data"));
  CHECK(back.train.count() == ds.train.count());
  CHECK(back.train.targets == ds.train.targets);
  CHECK(back.train.inputs[0] == ds.train.inputs[0]);
  CHECK(back.sample_rate == 36.0);

  // identical inputs and options reproduce byte-identical datasets
  preprocess_dir(fx.raw, fx.dir("data2"), opt);
  CHECK(slurp(fx.dir("data") + "/train.bin") == slurp(fx.dir("data2") + "/train.bin"));
  CHECK(slurp(fx.dir("data") + "/test.bin") == slurp(fx.dir("data2") + "/test.bin"));
}

TEST_CASE("train/eval/predict/smooth lifecycle") {
  Fixture fx;
  preprocess_dir(fx.raw, fx.dir("data"), small_preprocess());

  TrainRunOptions topt;
  topt.model.sequence_size = 10;
  topt.model.hidden = 4;
  topt.model.num_layers = 1;
  topt.train.epochs = 2;
  topt.train.seed = 3;
  const TrainRunResult rr = train_run(fx.dir("data"), fx.dir("run"), topt);
  CHECK(fs::exists(rr.checkpoint_path));
  CHECK(fs::exists(rr.log_path));
  CHECK(fs::exists(fx.dir("run") + "/metrics.json"));
  CHECK(fs::exists(fx.dir("run") + "/run.json"));
  CHECK(rr.report.size() == 2);
  CHECK(count_lines(rr.log_path) == 2);

  const Json run = read_json(fx.dir("run") + "/run.json");
  CHECK(run.at("config").at("hidden") == 4);
  CHECK(run.at("config_hash").get<std::string>().size() == 16);
  CHECK(run.contains("wall_seconds"));
  const Json metrics = read_json(fx.dir("run") + "/metrics.json");
  CHECK(!metrics.contains("wall_seconds"));  // metrics stay timing-free
  CHECK(metrics.at("mape_percent") == rr.test_metrics.mape_percent);

  // a re-run with the same seed reproduces metrics byte for byte
  train_run(fx.dir("data"), fx.dir("run_b"), topt);
  CHECK(slurp(fx.dir("run") + "/metrics.json") ==
        slurp(fx.dir("run_b") + "/metrics.json"));
  CHECK(slurp(rr.checkpoint_path) == slurp(fx.dir("run_b") + "/model.ckpt"));

  // eval on the same split reports the same numbers
  const MetricReport ev =
      eval_run(rr.checkpoint_path, fx.dir("data"), fx.dir("eval"));
  CHECK(ev.mape_percent == rr.test_metrics.mape_percent);
  CHECK(ev.angular_score_deg == rr.test_metrics.angular_score_deg);
  CHECK(count_lines(fx.dir("eval") + "/diffs.csv") ==
        static_cast<std::size_t>(ev.n_samples) + 1);

  const PredictSummary ps =
      predict_run(rr.checkpoint_path, fx.dir("data"), fx.dir("pred"));
  CHECK(ps.n_samples == ev.n_samples);
  CHECK(count_lines(ps.csv_path) == static_cast<std::size_t>(ps.n_samples) + 1);
  CHECK(ps.mean_wave_direction_deg >= 0.0);
  CHECK(ps.mean_wave_direction_deg < 360.0);

  const SmoothSummary sm = smooth_run(ps.csv_path, fx.dir("smooth"), 16.0, 36.0);
  CHECK(sm.kernel_samples == 576);
  CHECK(fs::exists(fx.dir("smooth") + "/smoothed.csv"));
  CHECK(fs::exists(fx.dir("smooth") + "/smooth.json"));
  CHECK(sm.std_after_deg <= sm.std_before_deg + 1e-9);
  CHECK(count_lines(fx.dir("smooth") + "/smoothed.csv") ==
        static_cast<std::size_t>(ps.n_samples) + 1);
}

TEST_CASE("train_run rejects mismatched sequence size and unknown kinds") {
  Fixture fx;
  preprocess_dir(fx.raw, fx.dir("data"), small_preprocess());

  TrainRunOptions topt;
  topt.model.sequence_size = 20;  // dataset was built with n = 10
  topt.train.epochs = 1;
  CHECK_THROWS_AS(train_run(fx.dir("data"), fx.dir("bad"), topt), ArgumentError);

  topt.model.sequence_size = 10;
  topt.model_kind = "transformer";
  CHECK_THROWS_AS(train_run(fx.dir("data"), fx.dir("bad"), topt), ArgumentError);
}

TEST_CASE("smooth_run input validation") {
  Fixture fx;
  const std::string csv = fx.dir("p.csv");
  {
    std::ofstream out(csv);
    out << "index,foo\n0,1\n";
  }
  CHECK_THROWS_AS(smooth_run(csv, fx.dir("s"), 16.0, 36.0), SchemaError);
  CHECK_THROWS_AS(smooth_run(csv, fx.dir("s"), 0.001, 36.0), ArgumentError);
  CHECK_THROWS_AS(smooth_run(fx.dir("missing.csv"), fx.dir("s"), 16.0, 36.0),
                  DataError);
}

TEST_CASE("run_sweep: degenerate single-cell grid") {
  Fixture fx;
  SweepOptions opt;
  opt.seed = 21;
  opt.epochs = 1;
  opt.stride = 10;
  opt.parallelism = 2;
  opt.sequence_sizes = {6};
  opt.hidden_sizes = {3};
  opt.layer_counts = {1};
  opt.learning_rates = {1e-3};

  const SweepResult res = run_sweep(fx.raw, fx.dir("sweep"), opt);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.cells[0].ok);
  CHECK(res.best_angular_index == 0);
  CHECK(res.best_mape_index == 0);
  CHECK(count_lines(res.table_csv_path) == 2);
  CHECK(slurp(res.table_csv_path).rfind(
            "sequence_size,hidden,layers,learning_rate,mape_percent,"
            "angular_score_deg",
            0) == 0);

  const Json j = read_json(fx.dir("sweep") + "/sweep.json");
  CHECK(j.at("selected").at("hidden") == 3);
  CHECK(j.at("cells").size() == 1);
}

TEST_CASE("run_baseline: circular mean and validation") {
  Fixture fx;
  preprocess_dir(fx.raw, fx.dir("data"), small_preprocess());

  TrainConfig tc;
  tc.epochs = 1;
  tc.seed = 2;
  ModelConfig mc;
  mc.sequence_size = 10;
  mc.hidden = 4;

  const auto rows =
      run_baseline(fx.dir("data"), fx.dir("base"), {"circular_mean"}, mc, tc);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].model == "circular_mean");
  CHECK(rows[0].angular_score_deg > 0.0);
  CHECK(fs::exists(fx.dir("base") + "/baseline.csv"));
  CHECK(fs::exists(fx.dir("base") + "/baseline.json"));

  CHECK_THROWS_AS(
      run_baseline(fx.dir("data"), fx.dir("base"), {"forest"}, mc, tc),
      ArgumentError);
}

TEST_CASE("circular_mean_predictor on constant targets") {
  WindowSet ws;
  ws.n = 4;
  const double d = 0.8;
  ws.targets.resize(5, 2);
  for (int i = 0; i < 5; ++i) {
    ws.inputs.push_back(Mat::Zero(3, kFeatureCount));
    ws.targets.row(i) << std::sin(d), std::cos(d);
    ws.final_yaw.push_back(0);
    ws.transect_index.push_back(0);
    ws.start_row.push_back(i);
  }
  const Vec2 p = circular_mean_predictor(ws);
  CHECK(p(0) == doctest::Approx(std::sin(d)).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(std::cos(d)).epsilon(1e-12));
}
